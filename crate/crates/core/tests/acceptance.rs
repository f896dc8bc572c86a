//! One PASS/FAIL line per acceptance criterion.
//!
//! Everything runs inside a single test so the wall-clock limits are not
//! measured against other tests sharing the machine. Lines go straight to
//! the process stdout, past the harness capture, so they appear in every
//! run.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use hubbard_bounds::bounds::{
    extensivity_sweep, q7_norm_three_ways, thm1_report, thm2_report, BoundReport, FockInstance, RadiusSettings,
    TRACE_PREFACTORS,
};
use hubbard_bounds::fock::properties::{car_defect, property_report, CAR_MAX_MODES};
use hubbard_bounds::fock::wick_identity_check;
use hubbard_bounds::hartree_fock::{
    a_lower_bound, eigenpair, gap_residual, gauge_matrix, hf_energy_density, hf_functional, hf_projector, hopping_matrix, one_particle_hamiltonian,
    perturbed_projectors, solve_gap, spin_sign,
};
use hubbard_bounds::lattice::TorusLattice;
use num_complex::Complex64;

const GAP_TOL: f64 = 1e-12;
const PROJECTOR_TOL: f64 = 1e-10;
const WICK_TOL: f64 = 1e-9;
const WICK_BUDGET: Duration = Duration::from_secs(30);
const Q7_REL_TOL: f64 = 1e-9;
const THM1_SLACK: f64 = 1e-8;
const RE_Q7_TOL: f64 = 1e-10;
const NUMBER_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const FUNCTIONAL_TOL: f64 = 1e-10;
const PERTURBATION_SLACK: f64 = 1e-9;
const EIGENPAIR_TOL: f64 = 1e-12;
const PERTURBATIONS: usize = 200;
const PERTURBATION_SEED: u64 = 20_240_601;

/// `(L, g)` pairs with an exact Fock space, `d = 1`.
const FOCK_POINTS: [(usize, f64); 4] = [(4, 1.0), (4, 2.0), (8, 1.0), (8, 2.0)];

#[derive(Default)]
struct Criterion {
    problems: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(what());
        }
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    fn passed(&self) -> bool {
        self.problems.is_empty()
    }

    fn line(&self, n: usize, title: &str) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {n} [{status}] {title}");
        if !self.notes.is_empty() {
            s += &format!(" | {}", self.notes.join("; "));
        }
        for p in &self.problems {
            s += &format!("\n    - {p}");
        }
        s
    }
}

fn say(s: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{s}").unwrap();
    out.flush().unwrap();
}

fn lattice(d: usize, l: usize) -> TorusLattice {
    TorusLattice::new(d, l).unwrap()
}

fn record<'a>(rep: &'a BoundReport, name: &str) -> &'a hubbard_bounds::bounds::CheckRecord {
    rep.record(name).unwrap_or_else(|| panic!("missing record {name}"))
}

fn gap_equation() -> Criterion {
    let mut c = Criterion::default();
    let mut slowest = Duration::ZERO;
    for d in 1..=3 {
        for l in [4, 8, 16] {
            for g in [0.5, 1.0, 2.0] {
                let t = Instant::now();
                let lat = lattice(d, l);
                let delta = solve_gap(&lat, g, GAP_TOL);
                let took = t.elapsed();
                slowest = slowest.max(took);
                let Ok(delta) = delta else {
                    c.require(false, || format!("d={d} L={l} g={g}: solver error {:?}", delta.unwrap_err()));
                    continue;
                };
                let r = gap_residual(&lat, g, delta).unwrap();
                c.require(delta > 0.0 && delta < 0.5, || format!("d={d} L={l} g={g}: delta {delta}"));
                c.require(r.abs() < GAP_TOL, || format!("d={d} L={l} g={g}: residual {r:e}"));
                c.require(took < Duration::from_secs(1), || format!("d={d} L={l} g={g}: {took:?}"));
            }
        }
    }
    c.note(format!("27 points, slowest {slowest:.2?}"));
    c
}

fn projector_identities() -> Criterion {
    let mut c = Criterion::default();
    let mut count = 0;
    for d in 1..=3 {
        for l in [4, 8, 16] {
            for g in [0.5, 1.0, 2.0] {
                let lat = lattice(d, l);
                if lat.num_sites() > 256 {
                    continue;
                }
                count += 1;
                let delta = solve_gap(&lat, g, GAP_TOL).unwrap();
                let hf = hf_projector(&lat, g, delta).unwrap();
                let p = &hf.projector;
                let idem = (p * p - p).camax();
                let trace = p.trace().re;
                let n = lat.num_sites() as f64;
                let mut diag = 0.0f64;
                for x in 0..lat.num_sites() {
                    for s in 0..2 {
                        let want = 0.5 - spin_sign(s) * lat.gauge_sign(x) * delta;
                        diag = diag.max((p[(2 * x + s, 2 * x + s)] - Complex64::new(want, 0.0)).norm());
                    }
                }
                let tag = format!("d={d} L={l} g={g}");
                c.require(idem < PROJECTOR_TOL, || format!("{tag}: |P^2 - P| = {idem:e}"));
                c.require((trace - n).abs() < PROJECTOR_TOL, || format!("{tag}: Tr P = {trace}"));
                c.require(diag < PROJECTOR_TOL, || format!("{tag}: diagonal off by {diag:e}"));
            }
        }
    }
    c.note(format!("{count} points with |Λ| <= 256"));
    c
}

fn wick_identity(instances: &mut Instances) -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    for g in [0.5, 1.0, 2.0] {
        let inst = instances.get(4, g);
        let w = wick_identity_check(&inst.frame, &inst.lat, &inst.suite, WICK_TOL).unwrap();
        let rep = w.to_bound_report(&inst.lat, inst.hf.delta);
        let offenders: Vec<String> = rep
            .failures()
            .filter(|r| r.name.starts_with("wick.coefficient"))
            .map(|r| format!("{} = {} (expected {})", r.name, r.measured, r.bound))
            .collect();
        c.require(w.residual < WICK_TOL, || {
            format!(
                "g={g}: residual {:.6} (with the number shift removed {:.1e}); offending: {}",
                w.residual,
                w.residual_with_shift,
                if offenders.is_empty() { "none".to_string() } else { offenders.join(", ") }
            )
        });
    }
    let took = start.elapsed();
    c.require(took < WICK_BUDGET, || format!("took {took:?}"));
    c.note(format!("256-dim space, {took:.2?}"));
    c
}

fn q7_three_ways(instances: &mut Instances) -> Criterion {
    let mut c = Criterion::default();
    let mut prefactors = Vec::new();
    for (l, g) in FOCK_POINTS {
        let inst = instances.get(l, g);
        let n = q7_norm_three_ways(&inst.suite, &inst.hf, &inst.lat).unwrap();
        let rel = (n.brute - n.closed).abs() / n.closed.abs();
        c.require(rel < Q7_REL_TOL, || {
            format!("L={l} g={g}: brute {:.9} vs closed {:.9} (relative {rel:.3e})", n.brute, n.closed)
        });
        c.require(n.prefactor.is_some(), || {
            format!("L={l} g={g}: no prefactor in {TRACE_PREFACTORS:?} matches brute/trace = {}", n.brute / n.trace)
        });
        prefactors.push(n.prefactor);
    }
    let first = prefactors[0];
    c.require(prefactors.iter().all(|p| *p == first), || format!("prefactor varies: {prefactors:?}"));
    if let Some(p) = first {
        c.note(format!("resolved trace prefactor {p}"));
    }
    c
}

fn theorem_one(instances: &mut Instances) -> Criterion {
    let mut c = Criterion::default();
    for (l, g) in FOCK_POINTS {
        let inst = instances.get(l, g);
        let rep = thm1_report(&inst.suite, &inst.hf, &inst.lat, &inst.frame, RadiusSettings::default()).unwrap();
        let tag = format!("L={l} g={g}");
        for nu in 3..=6 {
            let (name, bound) = if nu == 6 {
                ("thm1.q6_radius_n_plus_q1".to_string(), 1.0)
            } else {
                (format!("thm1.q{nu}_radius_n"), 2.0)
            };
            let r = record(&rep, &name).measured;
            c.require(r <= bound + THM1_SLACK, || format!("{tag}: {name} = {r} > {bound}"));
            let vac = record(&rep, &format!("thm1.q{nu}_annihilates_vacuum")).measured;
            c.require(vac == 0.0, || format!("{tag}: |Q{nu} Ω| = {vac:e}"));
        }
        for f in rep.failures() {
            c.require(false, || format!("{tag}: {} measured {} bound {}", f.name, f.measured, f.bound));
        }
        if l == 4 && g == 2.0 {
            let radii: Vec<String> = [3, 4, 5]
                .iter()
                .map(|nu| format!("{:.4}", record(&rep, &format!("thm1.q{nu}_radius_n")).measured))
                .chain([format!("{:.4}", record(&rep, "thm1.q6_radius_n_plus_q1").measured)])
                .collect();
            c.note(format!("L=4 g=2 radii {}", radii.join(", ")));
        }
    }
    c
}

fn theorem_two(instances: &mut Instances) -> Criterion {
    let mut c = Criterion::default();
    for (l, g) in FOCK_POINTS {
        let inst = instances.get(l, g);
        let d = inst.lat.dim() as f64;
        for eps in [1e-3, 0.25, 0.5] {
            let rep = thm2_report(&inst.suite, &inst.hf, &inst.lat, eps).unwrap();
            let tag = format!("L={l} g={g} eps={eps}");
            let at = |name: &str| record(&rep, &format!("thm2.{name}[eps={eps}]")).measured;
            let rq = at("re_q7");
            let q7n = record(&rep, "thm2.q7_norm_pair_sum").measured.sqrt();
            let want = 2.0 * eps * q7n;
            c.require((rq - want).abs() < RE_Q7_TOL, || {
                format!("{tag}: <Re Q7> = {rq:.9} vs 2 eps |Q7 Ω| = {want:.9} (ratio {:.6})", rq / want)
            });
            let n = at("number");
            c.require((n - 4.0 * eps * eps).abs() < NUMBER_TOL, || format!("{tag}: <N> = {n:e}"));
            let t = at("kinetic");
            c.require(t <= 4.0 * eps * eps * d, || {
                format!("{tag}: <T_HF> = {t:.6e} > 4 eps^2 d = {:.6e}", 4.0 * eps * eps * d)
            });
            let qm = record(&rep, &format!("thm2.q_main[eps={eps}]"));
            c.require(qm.measured <= qm.bound, || format!("{tag}: <Q_main> = {} > {}", qm.measured, qm.bound));
            if eps == 0.25 {
                for name in ["thm2.q7_q1_q7_trace", "thm2.q7_q2_q7_trace"] {
                    let r = record(&rep, name);
                    let rel = (r.measured - r.bound).abs() / r.bound.abs();
                    c.require(rel < TRACE_TOL, || format!("L={l} g={g}: {name} {} vs {}", r.measured, r.bound));
                }
            }
        }
    }
    c
}

fn theorem_three() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let lengths: Vec<usize> = (4..=64).step_by(4).collect();
    let mut worst = f64::INFINITY;
    for d in 1..=3 {
        for g in [0.5, 1.0, 2.0] {
            let sweep = extensivity_sweep(d, &lengths, g, GAP_TOL).unwrap();
            let bound = a_lower_bound(d, g);
            for r in &sweep.rows {
                c.require(r.q7_per_vol >= r.a_half, || {
                    format!("d={d} g={g} L={}: 1-4Δ² = {} < a/2 = {}", r.length, r.q7_per_vol, r.a_half)
                });
                let a = 2.0 * r.a_half;
                c.require(a >= bound, || format!("d={d} g={g} L={}: a = {a} < {bound}", r.length));
                worst = worst.min(r.q7_per_vol - r.a_half);
            }
        }
    }
    let took = start.elapsed();
    c.require(took < SWEEP_BUDGET, || format!("sweep took {took:?}"));
    c.note(format!("{} points, smallest margin {worst:.4}, {took:.2?}", 9 * lengths.len()));
    c
}

fn hartree_fock_functional() -> Criterion {
    let mut c = Criterion::default();
    let mut lowest_gain = f64::INFINITY;
    for l in [4, 8] {
        let lat = lattice(1, l);
        let part = lat.momentum_partition();
        let n = lat.num_sites() as f64;
        let t = hopping_matrix(&lat);
        let gauge = gauge_matrix(&lat);
        let flipped = (&gauge * &t * &gauge + &t).amax();
        c.require(flipped == 0.0, || format!("L={l}: |G T G + T| = {flipped:e}"));
        for g in [0.5, 1.0, 2.0] {
            let delta = solve_gap(&lat, g, GAP_TOL).unwrap();
            let hf = hf_projector(&lat, g, delta).unwrap();
            let e = hf_functional(&lat, g, &hf.projector).unwrap();
            let closed = n * hf_energy_density(&lat, g, delta);
            c.require((e - closed).abs() < FUNCTIONAL_TOL, || {
                format!("L={l} g={g}: functional {e:.10} vs |Λ|(g/2 + F_L) = {closed:.10} (difference {:.6})", e - closed)
            });
            for (i, p) in perturbed_projectors(&lat, &hf, PERTURBATIONS, PERTURBATION_SEED ^ l as u64)
                .iter()
                .enumerate()
            {
                let ep = hf_functional(&lat, g, p).unwrap();
                lowest_gain = lowest_gain.min(ep - e);
                c.require(ep >= e - PERTURBATION_SLACK, || format!("L={l} g={g}: perturbation {i} lowers the energy to {ep}"));
            }
            let h = one_particle_hamiltonian(&lat, g * delta);
            let mut worst = 0.0f64;
            for &xi in &part.plus {
                for sigma in [1.0, -1.0] {
                    for kappa in [1.0, -1.0] {
                        let (psi, energy) = eigenpair(&lat, &part, g * delta, xi, sigma, kappa).unwrap();
                        let res = (&h * &psi - &psi * Complex64::new(energy, 0.0)).norm();
                        worst = worst.max(res);
                    }
                }
            }
            c.require(worst < EIGENPAIR_TOL, || format!("L={l} g={g}: eigenpair residual {worst:e}"));
        }
    }
    c.note(format!(
        "{PERTURBATIONS} perturbations per point, smallest energy gain {lowest_gain:.3e}"
    ));
    c
}

fn property_suites(instances: &mut Instances) -> Criterion {
    let mut c = Criterion::default();
    for m in 1..=CAR_MAX_MODES {
        let defect = car_defect(m).unwrap();
        c.require(defect == 0.0, || format!("CAR defect {defect:e} at M={m}"));
    }
    for (l, g) in [(4, 0.5), (4, 1.0), (4, 2.0), (8, 1.0), (8, 2.0)] {
        let inst = instances.get(l, g);
        let rep = property_report(inst, 11).unwrap();
        for f in rep.failures() {
            c.require(false, || format!("L={l} g={g}: {} measured {:e}", f.name, f.measured));
        }
        for name in ["car.q1_psd", "car.q2_psd", "car.t_hf_minus_gap_number_psd"] {
            c.require(rep.record(name).is_some(), || format!("L={l} g={g}: {name} missing"));
        }
        for nu in 1..=7 {
            for what in ["grading", "orbital_vs_position"] {
                let name = format!("car.q{nu}_{what}");
                c.require(rep.record(&name).is_some(), || format!("L={l} g={g}: {name} missing"));
            }
        }
    }
    c
}

/// Assembled Fock instances, built once per `(L, g)` at `d = 1`.
struct Instances(BTreeMap<(usize, u64), FockInstance>);

impl Instances {
    fn get(&mut self, l: usize, g: f64) -> &FockInstance {
        self.0
            .entry((l, g.to_bits()))
            .or_insert_with(|| FockInstance::build(&lattice(1, l), g, GAP_TOL, 16).unwrap())
    }
}

#[test]
fn acceptance_criteria() {
    let mut instances = Instances(BTreeMap::new());
    let mut failed = Vec::new();
    let mut run = |n: usize, title: &str, c: Criterion| {
        say(&c.line(n, title));
        if !c.passed() {
            failed.push(n);
        }
    };
    run(1, "gap equation", gap_equation());
    run(2, "projector identities", projector_identities());
    run(3, "Wick identity", wick_identity(&mut instances));
    run(4, "three-way |Q7 Ω|^2", q7_three_ways(&mut instances));
    run(5, "sandwiched numerical radii", theorem_one(&mut instances));
    run(6, "trial-vector expectations", theorem_two(&mut instances));
    run(7, "extensivity sweep", theorem_three());
    run(8, "Hartree-Fock functional", hartree_fock_functional());
    run(9, "property suites", property_suites(&mut instances));
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
