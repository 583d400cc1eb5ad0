use std::time::Instant;

use crate::potential::{random_direction, uniform_in_ball};
use crate::propcheck::report::{SuiteReport, Table};
use crate::schemes::NoiseStream;
use crate::taming::{TamedDrift, TamingRegion};
use crate::vecops::{dist, dot, norm, sub};

const REL_SLACK: f64 = 1e-9;
const AGREEMENT_TOL: f64 = 1e-12;
const CONTINUITY_TOL: f64 = 1e-9;
const CONTINUITY_DIRECTIONS: usize = 32;
const ROUNDING_ULPS: f64 = 4.0;

/// Radial strata: the four regions, plus thin shells around their boundaries.
#[derive(Debug, Clone, Copy)]
enum Stratum {
    Region(TamingRegion),
    Boundary,
}

const STRATA: [Stratum; 5] = [
    Stratum::Region(TamingRegion::Interior),
    Stratum::Region(TamingRegion::InnerShell),
    Stratum::Region(TamingRegion::OuterShell),
    Stratum::Region(TamingRegion::Exterior),
    Stratum::Boundary,
];

fn sample_point(stream: &mut NoiseStream, dim: usize, r: f64, s: Stratum) -> Vec<f64> {
    let radius = match s {
        Stratum::Region(TamingRegion::Interior) => {
            let p = uniform_in_ball(stream.rng_mut(), dim, r - 2.0);
            return p;
        }
        Stratum::Region(TamingRegion::InnerShell) => r - 2.0 + stream.uniform::<f64>(),
        Stratum::Region(TamingRegion::OuterShell) => r - 1.0 + stream.uniform::<f64>(),
        Stratum::Region(TamingRegion::Exterior) => r + 2.0 * r * stream.uniform::<f64>(),
        Stratum::Boundary => {
            let k = (stream.uniform::<f64>() * 3.0).floor().min(2.0);
            let offset = (2.0 * stream.uniform::<f64>() - 1.0) * 1e-3;
            r - 2.0 + k + offset
        }
    };
    let dir: Vec<f64> = random_direction(stream.rng_mut(), dim);
    dir.into_iter().map(|d| d * radius).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(" "))
}

/// Checks the four properties of the tamed drift on `n` stratified pairs:
///
/// * agreement `h_λ = h` on `|x| ≤ r_λ − 2`,
/// * growth `|h_λ(x)| ≤ (2/√λ)(1 + |x|)`,
/// * Lipschitz bound `|h_λ(x) − h_λ(y)| ≤ M_λ|x − y|`,
/// * monotonicity `⟨h_λ(x) − h_λ(y), x − y⟩ ≥ m|x − y|²`,
///
/// plus continuity across the three region boundaries. Two thirds of the
/// pairs are drawn independently from a pair of strata, one third are
/// close pairs `y = x + δu` with `δ ∈ [1e−4, 1e−1]`. All points satisfy
/// `|x| ≤ 3r_λ`. Measured constants are reported alongside.
pub fn suite_taming(td: &TamedDrift<f64>, n: usize, seed: u64) -> SuiteReport {
    let start = Instant::now();
    let mut report = SuiteReport::new(
        "taming",
        Table::new(&["property", "cases", "violations", "measured", "bound"]),
    );
    let dim = td.dim();
    let r = td.r_lambda();
    let m = td.m();
    let ml = td.m_lambda();
    let growth_k = 2.0 / td.lambda().sqrt();
    let base = td.base();
    let mut stream = NoiseStream::new(seed, 0);

    let mut counts = [[0usize; 2]; 5]; // [cases, violations] per property
    let mut worst_agreement = 0.0f64;
    let mut worst_growth = 0.0f64; // sup √λ|h_λ(x)|/(1+|x|)
    let mut worst_lip = 0.0f64;
    let mut worst_mono = f64::INFINITY;

    for i in 0..n {
        let (x, y) = if i % 3 == 2 {
            let s = STRATA[(i / 3) % STRATA.len()];
            let x = sample_point(&mut stream, dim, r, s);
            let u: Vec<f64> = random_direction(stream.rng_mut(), dim);
            let delta = 10f64.powf(-4.0 + 3.0 * stream.uniform::<f64>());
            let y = x.iter().zip(&u).map(|(a, b)| a + delta * b).collect();
            (x, y)
        } else {
            let k = i - i / 3;
            let sa = STRATA[k % STRATA.len()];
            let sb = STRATA[(k / STRATA.len()) % STRATA.len()];
            (sample_point(&mut stream, dim, r, sa), sample_point(&mut stream, dim, r, sb))
        };
        let hx = td.eval(&x);
        let hy = td.eval(&y);
        let input = || format!("x={} y={}", fmt_vec(&x), fmt_vec(&y));

        for (p, hp) in [(&x, &hx), (&y, &hy)] {
            let np = norm(p);
            if np <= r - 2.0 {
                counts[0][0] += 1;
                let h = base.gradient(p);
                let diff = dist(&h, hp) / (1.0 + norm(&h));
                worst_agreement = worst_agreement.max(diff);
                if diff > AGREEMENT_TOL {
                    counts[0][1] += 1;
                    report.fail(i, input(), "h_lambda = h inside r-2", format!("relative gap {diff:.3e}"));
                }
            }
            counts[1][0] += 1;
            let lhs = norm(hp);
            let rhs = growth_k * (1.0 + np);
            worst_growth = worst_growth.max(lhs / rhs * 2.0);
            if lhs > rhs * (1.0 + REL_SLACK) {
                counts[1][1] += 1;
                report.fail(i, input(), format!("|h_lambda| <= {rhs:.6e}"), format!("{lhs:.6e}"));
            }
        }

        let dx = sub(&x, &y);
        let dh = sub(&hx, &hy);
        let ndx = norm(&dx);
        if ndx == 0.0 {
            continue;
        }
        counts[2][0] += 1;
        let lip = norm(&dh) / ndx;
        worst_lip = worst_lip.max(lip);
        if lip > ml * (1.0 + REL_SLACK) {
            counts[2][1] += 1;
            report.fail(i, input(), format!("Lipschitz ratio <= {ml:.6e}"), format!("{lip:.6e}"));
        }
        counts[3][0] += 1;
        let mono = dot(&dh, &dx) / (ndx * ndx);
        worst_mono = worst_mono.min(mono);
        // Rounding in h_λ(x) − h_λ(y) for close pairs far out, where |h_λ| is large.
        let rounding = ROUNDING_ULPS * f64::EPSILON * (norm(&hx) + norm(&hy)) / ndx;
        if mono < m * (1.0 - REL_SLACK) - rounding {
            counts[3][1] += 1;
            report.fail(i, input(), format!("monotonicity ratio >= {m:.6e}"), format!("{mono:.6e}"));
        }
    }

    // Continuity across |x| = r−2, r−1, r from both sides.
    let mut worst_jump = 0.0f64;
    for k in 0..CONTINUITY_DIRECTIONS {
        let u: Vec<f64> = random_direction(stream.rng_mut(), dim);
        for (b, rho) in [r - 2.0, r - 1.0, r].into_iter().enumerate() {
            let eps = 1e-13 * rho;
            let inside: Vec<f64> = u.iter().map(|c| c * (rho - eps)).collect();
            let outside: Vec<f64> = u.iter().map(|c| c * (rho + eps)).collect();
            let hi = td.eval(&inside);
            let ho = td.eval(&outside);
            let jump = dist(&hi, &ho) / (1.0 + norm(&hi));
            worst_jump = worst_jump.max(jump);
            counts[4][0] += 1;
            if jump > CONTINUITY_TOL {
                counts[4][1] += 1;
                report.fail(
                    n + 3 * k + b,
                    format!("|x|={rho:.6e} direction={}", fmt_vec(&u)),
                    "relative jump <= 1e-9",
                    format!("{jump:.3e}"),
                );
            }
        }
    }

    let measured = [worst_agreement, worst_growth, worst_lip, worst_mono, worst_jump];
    let bounds = [AGREEMENT_TOL, 2.0, ml, m, CONTINUITY_TOL];
    let names = ["agreement", "growth", "lipschitz", "monotonicity", "continuity"];
    for j in 0..5 {
        report.table.push(vec![
            names[j].into(),
            counts[j][0].into(),
            counts[j][1].into(),
            measured[j].into(),
            bounds[j].into(),
        ]);
    }
    report.cases = counts.iter().map(|c| c[0]).sum();
    report.measure("r_lambda", r);
    report.measure("R_lambda", td.cap());
    report.measure("M_lambda", ml);
    report.measure("max_agreement_gap", worst_agreement);
    report.measure("growth_constant", worst_growth);
    report.measure("lipschitz_constant", worst_lip);
    report.measure("lipschitz_constant_over_M_lambda", worst_lip / ml);
    report.measure("monotonicity_constant", worst_mono);
    report.measure("max_boundary_jump", worst_jump);
    for j in 0..5 {
        report.measure(&format!("{}_violations", names[j]), counts[j][1] as f64);
    }
    report.finish(start.elapsed())
}
