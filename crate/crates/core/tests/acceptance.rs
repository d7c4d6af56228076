//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use woven_core::certificates::{
    cert_admissible, cert_approx_dual_weaving, cert_canonical_dual_woven, cert_dual_weaving, paulsen_threshold,
    RieszPartOperator,
};
use woven_core::duality::{
    alternate_dual_family, approximate_dual_defect, approximate_dual_family, canonical_dual, dual_residual,
    null_residual,
};
use woven_core::generators::{example_family, gaussian_matrix, random_frame_with, random_riesz_basis, rng_from_seed};
use woven_core::linalg::{self, CMatrix, Complex64};
use woven_core::sweep::soundness_sweep;
use woven_core::weaving::{all_weavings, min_partition_distance, weakly_woven, woven_oracle, DEFAULT_ENUMERATION_CAP};
use woven_core::{Frame, DEFAULT_TOL};

use rand::Rng;

/// Largest oracle upper bound seen minus the sum of the input upper bounds.
#[derive(Default)]
struct UpperLedger {
    pairs: usize,
    worst_excess: f64,
}

impl UpperLedger {
    fn record(&mut self, oracle_upper: f64, frames: &[Frame]) {
        let sum: f64 = frames.iter().map(|f| f.optimal_bounds().upper).sum();
        self.pairs += 1;
        self.worst_excess = self.worst_excess.max(oracle_upper - sum);
    }

    fn oracle(&mut self, frames: &[Frame]) -> woven_core::weaving::WovenReport {
        let r = woven_oracle(frames, DEFAULT_TOL).expect("oracle runs");
        self.record(r.universal_upper, frames);
        r
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(conditions: &[(&str, bool)], detail: String) -> Outcome {
    let failed: Vec<&str> = conditions.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        Outcome { pass: true, detail }
    } else {
        Outcome {
            pass: false,
            detail: format!("{detail}; failed: {}", failed.join(", ")),
        }
    }
}

fn example_reproduction(ledger: &mut UpperLedger) -> Outcome {
    let (phi, u) = example_family(4);
    let s_err = linalg::op_norm(&(phi.frame_operator() - linalg::identity(4)));
    let null = null_residual(&phi, &u).unwrap();
    let b_u = u.upper_bound();
    let family = alternate_dual_family(&phi, &u).unwrap();
    let eps_star_err = (family.epsilon_star - (2f64.sqrt() - 1.0)).abs();
    // 1/9 + 2/3
    let third = cert_dual_weaving(&phi, &u, 1.0 / 3.0).unwrap();
    let load = &third.margins[1];
    let seven_ninths = (load.lhs - 7.0 / 9.0).abs() <= 1e-15 && load.satisfied() && third.holds;
    let alpha = 0.3;
    let member = family.member(alpha);
    let residual = dual_residual(&phi, &member).unwrap();
    let report = ledger.oracle(&[phi.clone(), member]);
    check(
        &[
            ("m = 10", phi.len() == 10),
            ("|S - I| <= 1e-12", s_err <= 1e-12),
            ("|Phi U^H| <= 1e-12", null <= 1e-12),
            ("B_U = 1", (b_u - 1.0).abs() <= 1e-12),
            ("epsilon* = sqrt2 - 1", eps_star_err <= 1e-12),
            ("7/9 < 1 at eps = 1/3", seven_ninths),
            ("dual at alpha = 0.3", residual <= 1e-10),
            ("oracle woven", report.is_woven),
            ("universal lower >= 0.31", report.universal_lower >= 0.31 - 1e-8),
            ("assignments = 2^10", report.assignments_checked == 1024),
        ],
        format!(
            "|S-I|={s_err:.1e} |PhiU^H|={null:.1e} B_U={b_u:.15} eps*={:.15} lhs(1/3)={:.17} residual={residual:.1e} A_univ={:.6}",
            family.epsilon_star, load.lhs, report.universal_lower
        ),
    )
}

fn approximate_dual_example(ledger: &mut UpperLedger) -> Outcome {
    let (phi, u) = example_family(4);
    let t = linalg::identity(4).scale(0.5);
    let theta = u.analysis();
    let cert = cert_approx_dual_weaving(&phi, &t, &theta, 0.2).unwrap();
    let load = cert.margins.last().unwrap();
    let family = approximate_dual_family(&phi, &t, &theta).unwrap();
    let member = family.member(0.19);
    let defect = approximate_dual_defect(&phi, &member).unwrap();
    let report = ledger.oracle(&[phi.clone(), member]);
    check(
        &[
            ("lhs = 6/25", (load.lhs - 6.0 / 25.0).abs() <= 1e-15),
            ("rhs = 1/4", (load.rhs - 0.25).abs() <= 1e-15),
            ("margin holds", load.satisfied()),
            ("|I - T_psi T_phi*| < 1", defect < 1.0),
            ("oracle woven", report.is_woven),
        ],
        format!(
            "lhs={:.17} rhs={:.17} defect(0.19)={defect:.6} A_univ={:.6}",
            load.lhs, load.rhs, report.universal_lower
        ),
    )
}

fn soundness(ledger: &mut UpperLedger) -> Outcome {
    let report = soundness_sweep(2024, 400).unwrap();
    for case in &report.cases {
        ledger.pairs += 1;
        ledger.worst_excess = ledger.worst_excess.max(case.oracle_upper - case.bessel_sum);
    }
    let every_kind = report.tallies.iter().all(|t| t.holds > 0);
    let incomplete_everywhere = report.tallies.iter().all(|t| t.woven_not_certified > 0);
    let dims_ok = report.cases.iter().all(|c| (2..=4).contains(&c.dim) && c.size <= 10);
    let tallies: Vec<String> = report
        .tallies
        .iter()
        .map(|t| format!("{:?}:{}/{}", t.kind, t.holds, t.instances))
        .collect();
    check(
        &[
            (">= 200 instances", report.cases.len() >= 200),
            ("zero violations", report.violations == 0),
            ("every kind certifies something", every_kind),
            ("woven pairs failing each kind", incomplete_everywhere),
            ("dims 2-4, m <= 10", dims_ok),
        ],
        format!(
            "{} instances, {} violations, {}",
            report.cases.len(),
            report.violations,
            tallies.join(" ")
        ),
    )
}

fn pair_for_equivalence(rng: &mut rand_chacha::ChaCha8Rng, k: usize) -> (Frame, Frame) {
    let dim = rng.random_range(2..=3);
    let m = rng.random_range(dim..=8);
    let phi = random_frame_with(dim, m, (0.5, 1.5), rng).unwrap();
    let psi = match k % 4 {
        0 => random_frame_with(dim, m, (0.5, 1.5), rng).unwrap(),
        1 => {
            // psi reorders phi, so some weavings repeat vectors
            let mut order: Vec<usize> = (0..m).collect();
            order.rotate_left(1 + k % (m - 1).max(1));
            phi.select(&order).unwrap()
        }
        2 => {
            // shared zero direction on a random index set
            let v = gaussian_matrix(dim, 1, rng);
            let q = linalg::identity(dim) - (&v * v.adjoint()).unscale(v.norm_squared());
            let keep = rng.random_range(0..m);
            let mut a = phi.synthesis().clone();
            let mut b = random_frame_with(dim, m, (0.5, 1.5), rng).unwrap().synthesis().clone();
            for i in 0..m {
                if i != keep {
                    a.set_column(i, &(&q * a.column(i)));
                    b.set_column(i, &(&q * b.column(i)));
                }
            }
            a.set_column(keep, &v.column(0));
            b.set_column(keep, &(&q * b.column(keep)));
            return (
                Frame::from_synthesis(a, DEFAULT_TOL).unwrap(),
                Frame::from_synthesis(b, DEFAULT_TOL).unwrap(),
            );
        }
        _ => {
            let e = gaussian_matrix(dim, m, rng);
            Frame::from_synthesis(phi.synthesis() + e.scale(0.3 / linalg::op_norm(&e)), DEFAULT_TOL).unwrap()
        }
    };
    (phi, psi)
}

fn spanning_equivalence(ledger: &mut UpperLedger) -> Outcome {
    let mut rng = rng_from_seed(4);
    let (mut agree, mut woven, mut not_woven) = (0, 0, 0);
    for k in 0..100 {
        let (phi, psi) = pair_for_equivalence(&mut rng, k);
        let frames = [phi, psi];
        let bounds = ledger.oracle(&frames);
        let spanning = weakly_woven(&frames, DEFAULT_TOL, DEFAULT_ENUMERATION_CAP).unwrap();
        if bounds.is_woven == spanning.all_span {
            agree += 1;
        }
        if bounds.is_woven {
            woven += 1;
        } else {
            not_woven += 1;
        }
    }
    check(
        &[
            ("all 100 agree", agree == 100),
            ("both verdicts occur", woven > 0 && not_woven > 0),
        ],
        format!("{agree}/100 agree ({woven} woven, {not_woven} not woven)"),
    )
}

fn riesz_canonical(ledger: &mut UpperLedger) -> Outcome {
    let mut rng = rng_from_seed(5);
    let (mut woven, mut certified, mut discrepancies) = (0, 0, 0);
    let mut tightest = f64::INFINITY;
    for k in 0..100u64 {
        let dim = 1 + (k as usize % 5);
        let a: f64 = 0.05 + rng.random::<f64>();
        let b = if dim == 1 {
            a
        } else {
            a * (1.0 + 20.0 * rng.random::<f64>())
        };
        let phi = random_riesz_basis(dim, (a, b), 500 + k).unwrap();
        let dual = canonical_dual(&phi).unwrap();
        let report = ledger.oracle(&[phi.clone(), dual]);
        if report.is_woven {
            woven += 1;
        }
        let cert = cert_canonical_dual_woven(&phi, RieszPartOperator::FullFrame, DEFAULT_ENUMERATION_CAP).unwrap();
        if cert.holds {
            certified += 1;
            tightest = tightest.min(report.universal_lower - cert.implied_lower.unwrap());
        }
        if cert.message.contains("DISCREPANCY") {
            discrepancies += 1;
        }
    }
    check(
        &[("oracle woven in all 100", woven == 100), ("no discrepancy", discrepancies == 0)],
        format!(
            "{woven}/100 woven, {certified}/100 certified, min(oracle lower - min(A, 1/B)) = {tightest:.3e}, {discrepancies} discrepancies"
        ),
    )
}

fn distance_equivalence(ledger: &mut UpperLedger) -> Outcome {
    let mut rng = rng_from_seed(6);
    let (mut pairs, mut attempts, mut smallest) = (0, 0, f64::INFINITY);
    let mut all_positive = true;
    while pairs < 50 && attempts < 500 {
        attempts += 1;
        let dim = rng.random_range(2..=5);
        let phi = random_frame_with(dim, dim, (0.5, 1.5), &mut rng).unwrap();
        let psi = if attempts % 2 == 0 {
            random_frame_with(dim, dim, (0.2, 3.0), &mut rng).unwrap()
        } else {
            let e = gaussian_matrix(dim, dim, &mut rng);
            Frame::from_synthesis(
                phi.synthesis() + e.scale(0.4 * rng.random::<f64>() / linalg::op_norm(&e)),
                DEFAULT_TOL,
            )
            .unwrap()
        };
        if !psi.is_frame() || !ledger.oracle(&[phi.clone(), psi.clone()]).is_woven {
            continue;
        }
        pairs += 1;
        let d = min_partition_distance(&phi, &psi, DEFAULT_ENUMERATION_CAP).unwrap();
        smallest = smallest.min(d.min_d);
        all_positive &= d.min_d >= 1e-6;
    }
    let basis = Frame::from_real(2, &[vec![1.0, 0.0], vec![0.0, 1.0]], DEFAULT_TOL).unwrap();
    let permuted = Frame::from_real(2, &[vec![0.0, 1.0], vec![1.0, 0.0]], DEFAULT_TOL).unwrap();
    let d = min_partition_distance(&basis, &permuted, DEFAULT_ENUMERATION_CAP).unwrap();
    let j: Vec<usize> = d.argmin.iter().map(|i| i + 1).collect();
    let j_rank_deficient = {
        let w = woven_core::weaving::weave(&[basis, permuted], &d.assignment).unwrap();
        linalg::rank(w.synthesis(), DEFAULT_TOL) < 2
    };
    check(
        &[
            ("50 woven pairs", pairs == 50),
            ("min_d >= 1e-6 on woven pairs", all_positive),
            ("permuted pair min_d <= 1e-8", d.min_d <= 1e-8),
            ("reported J is rank deficient", j_rank_deficient),
        ],
        format!("{pairs} woven pairs from {attempts} draws, smallest min_d = {smallest:.3e}; permuted pair min_d = {:.1e} at J = {j:?}", d.min_d),
    )
}

fn bessel_sum(ledger: &UpperLedger) -> Outcome {
    check(
        &[("no weaving above sum of B_j + 1e-9", ledger.worst_excess <= 1e-9)],
        format!(
            "{} families, max(B_weave - sum B_j) = {:.3e}",
            ledger.pairs, ledger.worst_excess
        ),
    )
}

fn tight_grid() -> Outcome {
    let (parseval, u) = example_family(3);
    let mut rows = Vec::new();
    let mut ok = true;
    for a in [0.4, 0.5, 0.6, 1.0, 2.0] {
        let phi = Frame::from_synthesis(parseval.synthesis().scale(f64::sqrt(a)), DEFAULT_TOL).unwrap();
        let u_scaled = woven_core::duality::BesselSequence::from_matrix(u.matrix().clone()).unwrap();
        let cert = cert_dual_weaving(&phi, &u_scaled, 0.0).unwrap();
        let held = cert.margins[0].satisfied();
        ok &= held == (a > 0.5);
        rows.push(format!("A={a}:{}", if held { "holds" } else { "fails" }));
    }
    check(&[("holds iff A > 1/2", ok)], rows.join(" "))
}

fn admissibility(ledger: &mut UpperLedger) -> Outcome {
    let mut rng = rng_from_seed(9);
    let mut worst = 0.0f64;
    let mut all_hold = true;
    for _ in 0..10 {
        let m = rng.random_range(3..=8);
        let phi = random_frame_with(3, m, (0.4, 2.0), &mut rng).unwrap();
        let t = linalg::identity(3) * Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
        let cert = cert_admissible(&phi, &t, None).unwrap();
        all_hold &= cert.holds;
        let image = phi.apply_operator(&t).unwrap();
        let s = phi.frame_operator();
        let pair = [phi, image];
        ledger.oracle(&pair);
        for (_, w) in all_weavings(&pair, DEFAULT_ENUMERATION_CAP).unwrap() {
            let mut sw = CMatrix::zeros(3, 3);
            for col in w.synthesis().column_iter() {
                sw += col * col.adjoint();
            }
            worst = worst.max(linalg::max_abs_entry(&(sw - &s)));
        }
    }
    let (phi, _) = example_family(3);
    let (c, s) = (0.7f64.cos(), 0.7f64.sin());
    let rotation = linalg::from_real_rows(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let counter = cert_admissible(&phi, &rotation, None).unwrap();
    let message_ok = counter
        .message
        .contains("global invariance T S T* = S holds but per-index invariance fails");
    check(
        &[
            ("phase operators certified", all_hold),
            ("every weaving has frame operator S_phi", worst <= 1e-12),
            ("counterexample rejected", !counter.holds),
            ("distinguishing message", message_ok),
        ],
        format!("max entry deviation {worst:.1e}; counterexample: {}", counter.message),
    )
}

fn paulsen() -> Outcome {
    let reference = {
        let (m, n, a, alpha) = (2.0f64, 3.0f64, 1.0f64, 0.5f64);
        let poly = 27.0 * m * m * n * (n - 1.0).powi(8);
        let candidate = 8.0 * alpha * a.sqrt() / (4.0 * m.sqrt() + poly);
        if candidate < 0.5 {
            candidate
        } else {
            0.5
        }
    };
    let eps = paulsen_threshold(2, 3, 1.0, 0.5).unwrap();
    check(
        &[
            ("matches re-evaluation to 1e-9", (eps - reference).abs() <= 1e-9),
            ("about 4.822e-5", (eps - 4.822e-5).abs() < 1e-8),
        ],
        format!("threshold = {eps:.12e}, reference = {reference:.12e}"),
    )
}

fn timed(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed < l);
    let pass = out.pass && in_time;
    let timing = match limit {
        Some(l) => format!("{:.2}s (limit {}s)", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    println!(
        "{} {name}: {} [{timing}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn main() {
    let mut ledger = UpperLedger::default();
    let ten = Some(Duration::from_secs(10));
    let results = [
        timed("1 example reproduction", ten, || example_reproduction(&mut ledger)),
        timed("2 approximate-dual example", ten, || {
            approximate_dual_example(&mut ledger)
        }),
        timed("3 certificate soundness sweep", Some(Duration::from_secs(300)), || {
            soundness(&mut ledger)
        }),
        timed("4 spanning vs bounds equivalence", None, || {
            spanning_equivalence(&mut ledger)
        }),
        timed("5 Riesz basis woven with canonical dual", None, || {
            riesz_canonical(&mut ledger)
        }),
        timed("6 partition distance equivalence", None, || {
            distance_equivalence(&mut ledger)
        }),
        timed("8 tight-frame grid", None, tight_grid),
        timed("9 admissibility", None, || admissibility(&mut ledger)),
        timed("10 threshold formula", None, paulsen),
        timed("7 weaving upper bound <= sum of B_j over all runs above", None, || {
            bessel_sum(&ledger)
        }),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
