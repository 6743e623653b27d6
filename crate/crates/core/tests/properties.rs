//! Invariants checked on random inputs.

use std::f64::consts::PI;

use proptest::prelude::*;

use decaylab::analysis::{build_report, classify_decay, fit_power, AnalysisSettings};
use decaylab::barriers::{
    classical_power_barrier, compare_series, exponential_barrier, mixed_power_barrier, Barrier,
};
use decaylab::evolve::{evolve, EvolveProblem, Scheme};
use decaylab::frac_time::{
    caputo_l1, caputo_pointwise, solve_scalar_mixed, MixedDerivative, ScalarHistory, ScalarProblem,
};
use decaylab::grid::{dirichlet_energy, lebesgue_norm, poincare_ratio};
use decaylab::operators::{dissipation, gagliardo_seminorm_sq, Field, Operator};
use decaylab::{Grid, GridFunction, C64};

const N: usize = 31;

fn grid() -> Grid {
    Grid::new(0.0, 1.0, N).unwrap()
}

fn real_fn(vals: &[f64]) -> GridFunction {
    GridFunction::from_real(grid(), vals).unwrap()
}

fn complex_fn(re: &[f64], im: &[f64]) -> GridFunction {
    GridFunction::new(grid(), re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect()).unwrap()
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, N)
}

fn nonzero_values() -> impl Strategy<Value = Vec<f64>> {
    values().prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

/// Sum of the first three Dirichlet modes with the given amplitudes.
fn modes(amps: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |x| amps.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * x).sin()).sum()
}

fn field() -> impl Strategy<Value = Field> {
    (-3.0..3.0f64, -2.0..2.0f64, 0.0..12.0f64, 0.0..6.0f64)
        .prop_map(|(c, a, w, p)| Field { constant: c, modes: vec![(a, w, p)] })
}

fn max_rel_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    let scale = a.values().iter().map(|z| z.norm()).fold(1e-300, f64::max);
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

// ---- grid ----

proptest! {
    #[test]
    fn norm_is_homogeneous(v in values(), c in -50.0..50.0f64, s in 1.0..8.0f64) {
        let u = real_fn(&v);
        let lhs = lebesgue_norm(&u.scaled(c), s).unwrap();
        let rhs = c.abs() * lebesgue_norm(&u, s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn norms_increase_with_exponent(re in values(), im in values()) {
        // the domain has measure below 1, so Hölder gives ‖u‖₁ ≤ ‖u‖₂ ≤ ‖u‖₄ ≤ ‖u‖_∞
        let u = complex_fn(&re, &im);
        let n: Vec<f64> = [1.0, 2.0, 4.0, f64::INFINITY].iter().map(|&s| lebesgue_norm(&u, s).unwrap()).collect();
        for k in 1..n.len() {
            prop_assert!(n[k - 1] <= n[k] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn poincare_ratio_below_discrete_bound(v in nonzero_values()) {
        let h = grid().h();
        let lambda_min = (2.0 / h * (PI * h / 2.0).sin()).powi(2);
        let r = poincare_ratio(&real_fn(&v)).unwrap();
        prop_assert!(r <= lambda_min.powf(-0.5) * (1.0 + 1e-12));
    }
}

// ---- frac_time ----

proptest! {
    #[test]
    fn caputo_of_decreasing_history_to_zero_is_nonpositive(
        drops in prop::collection::vec(0.0..1.0f64, 2..80),
        alpha in 0.05..0.95f64,
        dt in 1e-3..1.0f64,
    ) {
        let total: f64 = drops.iter().sum();
        prop_assume!(total > 0.0);
        let mut v = vec![total];
        for d in &drops {
            v.push((v.last().unwrap() - d).max(0.0));
        }
        *v.last_mut().unwrap() = 0.0;
        let h = ScalarHistory::uniform(dt, v).unwrap();
        let d = caputo_pointwise(&h, alpha).unwrap();
        prop_assert!(d <= 1e-12 * total * dt.powf(-alpha));
    }

    #[test]
    fn caputo_forms_agree(
        v in prop::collection::vec(-2.0..2.0f64, 2..120),
        alpha in 0.05..0.95f64,
        dt in 1e-3..1.0f64,
    ) {
        let h = ScalarHistory::uniform(dt, v.clone()).unwrap();
        let a = caputo_l1(&h, alpha).unwrap();
        let b = caputo_pointwise(&h, alpha).unwrap();
        let scale = v.iter().map(|x| x.abs()).fold(1e-300, f64::max) * dt.powf(-alpha) * v.len() as f64;
        prop_assert!((a - b).abs() <= 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_solution_is_nonincreasing(
        lambda1 in 0.0..=1.0f64,
        alpha in 0.1..0.95f64,
        gamma in 0.5..3.0f64,
        k in 0.1..5.0f64,
        v0 in 0.0..5.0f64,
        corrected in any::<bool>(),
    ) {
        let d = MixedDerivative::from_lambda1(lambda1, alpha).unwrap();
        let mut p = ScalarProblem::new(d, k, gamma, v0, 0.01, 5.0);
        p.start_correction = corrected;
        let h = solve_scalar_mixed(&p).unwrap();
        for w in h.values().windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-13 * v0.max(1.0));
            prop_assert!(w[1] >= 0.0);
        }
    }
}

// ---- barriers ----

proptest! {
    #[test]
    fn mixed_power_envelope_and_continuity(
        u0 in 0.01..10.0f64,
        alpha in 0.05..0.95f64,
        gamma in 0.5..4.0f64,
        nu in 0.01..10.0f64,
    ) {
        let b = mixed_power_barrier(u0, alpha, gamma, nu).unwrap();
        let Barrier::MixedPower { t0, k_coef, .. } = b else { unreachable!() };
        let beta = alpha / gamma;
        prop_assert!((k_coef - u0 * t0.powf(beta)).abs() <= 1e-12 * k_coef);
        prop_assert!((b.value(t0) - k_coef * t0.powf(-beta)).abs() <= 1e-12 * u0);
        let c = u0 * (1.0 + t0.powf(beta));
        for i in 0..=400 {
            let t = t0 * 10f64.powf(-4.0 + 8.0 * i as f64 / 400.0);
            prop_assert!(b.value(t) <= c / (1.0 + t.powf(beta)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exponential_barrier_continuous_with_theta_below_one(
        w0 in 0.01..100.0f64,
        c in 0.01..10.0f64,
        gamma in 0.05..1.0f64,
    ) {
        let b = exponential_barrier(w0, c, gamma).unwrap();
        let Barrier::Exponential { t0, theta0, .. } = b else { unreachable!() };
        let q = 1.0 - gamma;
        let left = (w0.powf(q) - q * t0 / c).max(0.0).powf(1.0 / q);
        if t0 > 0.0 {
            prop_assert!((left - theta0).abs() <= 1e-12 * theta0.max(1.0));
            prop_assert!(theta0 <= 1.0 + 1e-12);
        } else {
            prop_assert!((theta0 - w0).abs() <= 1e-12 * w0);
        }
    }

    #[test]
    fn classical_barrier_continuous_with_floor(
        w0 in 0.0..10.0f64,
        c in 0.01..10.0f64,
        gamma in 1.1..4.0f64,
    ) {
        let b = classical_power_barrier(w0.max(1e-9), c, gamma).unwrap();
        let Barrier::ClassicalPower { w0: top, .. } = b else { unreachable!() };
        prop_assert!(top >= (c / (gamma - 1.0)).powf(1.0 / (gamma - 1.0)) * (1.0 - 1e-12));
        prop_assert!(top >= w0.max(1e-9));
        prop_assert!((b.value(1.0) - b.value(1.0 + 1e-12)).abs() <= 1e-10 * top);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scalar_solutions_stay_below_barriers(
        alpha in 0.2..0.9f64,
        gamma_idx in 0usize..3,
        lambda1 in 0.2..=1.0f64,
        k in 0.5..2.0f64,
        u0 in 0.5..2.0f64,
        frac in 0.05..0.999f64,
    ) {
        let gamma = [1.0, 2.0, 3.0][gamma_idx];
        let d = MixedDerivative::from_lambda1(lambda1, alpha).unwrap();
        let b = mixed_power_barrier(u0, alpha, gamma, k).unwrap();
        let t_end = (3.0 * b.t0()).clamp(10.0, 200.0);
        let v = solve_scalar_mixed(&ScalarProblem::new(d, k, gamma, frac * u0, t_end / 1000.0, t_end)).unwrap();
        prop_assert!(compare_series(&b.sample_like(&v).unwrap(), &v).unwrap());
    }
}

// ---- operators ----

proptest! {
    #[test]
    fn reductions_to_the_plain_operators(v in nonzero_values(), sigma in 0.05..0.95f64) {
        let u = real_fn(&v);
        let lap = Operator::Laplacian.apply(&u).unwrap();
        let frac = Operator::FracLaplacian { sigma }.apply(&u).unwrap();
        let pairs = [
            (Operator::Kirchhoff { m0: 1.0, b: 0.0 }, &lap),
            (Operator::Magnetic { field: Field::constant(0.0) }, &lap),
            (Operator::FracKirchhoff { sigma, m0: 1.0, b: 0.0 }, &frac),
            (Operator::FracMagnetic { sigma, field: Field::constant(0.0) }, &frac),
        ];
        for (op, want) in pairs {
            let got = op.apply(&u).unwrap();
            prop_assert!(max_rel_diff(want, &got) <= 1e-12, "{}", op.name());
        }
    }

    #[test]
    fn laplacian_pairing_is_the_dirichlet_energy(re in values(), im in values()) {
        let u = complex_fn(&re, &im);
        let d = dissipation(&Operator::Laplacian, &u, 2.0).unwrap();
        let e = dirichlet_energy(&u);
        prop_assert!(d >= 0.0);
        prop_assert!((d - e).abs() <= 1e-12 * e.max(1e-300));
    }

    #[test]
    fn frac_laplacian_pairing_is_the_gagliardo_energy(re in values(), im in values(), sigma in 0.05..0.95f64) {
        // independent double sum over all integer offsets, exterior values zero
        let u = complex_fn(&re, &im);
        let g = grid();
        let h = g.h();
        let reach = N + 1;
        let at = |i: isize| if (0..N as isize).contains(&i) { u.values()[i as usize] } else { C64::new(0.0, 0.0) };
        let mut pairs = 0.0;
        for i in -(reach as isize)..(N + reach) as isize {
            for m in 1..=reach {
                let w = h * (m as f64 * h).powf(-1.0 - 2.0 * sigma);
                pairs += w * (at(i + m as isize) - at(i)).norm_sqr();
            }
        }
        let mass: f64 = u.values().iter().map(|z| z.norm_sqr()).sum();
        let tail = ((reach as f64 + 0.5) * h).powf(-2.0 * sigma) / sigma;
        let energy = 2.0 * h * (pairs + tail * mass);
        let d = dissipation(&Operator::FracLaplacian { sigma }, &u, 2.0).unwrap();
        let z = gagliardo_seminorm_sq(&u, sigma).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((2.0 * d - energy).abs() <= 1e-10 * energy);
        prop_assert!((z - energy).abs() <= 1e-10 * energy);
    }

    #[test]
    fn porous_conserves_mass_and_dissipates(
        bumps in prop::collection::vec((0.25..0.75f64, 0.02..0.06f64, 0.0..2.0f64), 1..4),
        sigma in 0.05..0.45f64,
        s in 1.1..4.0f64,
    ) {
        // compactly supported in [0.1, 0.9]
        let f = |x: f64| -> f64 {
            bumps.iter().map(|&(c, w, a)| {
                let r = (x - c) / (2.0 * w);
                if r.abs() < 1.0 { a * (1.0 - r * r).powi(3) } else { 0.0 }
            }).sum()
        };
        let u = GridFunction::from_real_fn(grid(), f).unwrap();
        let l1 = lebesgue_norm(&u, 1.0).unwrap();
        prop_assume!(l1 > 1e-6);
        let op = Operator::PorousMedium { sigma, epsilon: None, c_kernel: 1.0 };
        let nu = op.apply(&u).unwrap();
        let h = grid().h();
        let mass: f64 = h * nu.values().iter().map(|z| z.re).sum::<f64>();
        prop_assert!(mass.abs() <= 1e-8 * l1 / h, "mass change {mass}");
        prop_assert!(dissipation(&op, &u, s).unwrap() >= 0.0);
    }

    #[test]
    fn schrodinger_control_does_not_dissipate(re in values(), im in values(), pot in field()) {
        let u = complex_fn(&re, &im);
        let op = Operator::SchrodingerControl { potential: pot };
        let nu = op.apply(&u).unwrap();
        let scale = grid().h() * u.values().iter().zip(nu.values()).map(|(a, b)| a.norm() * b.norm()).sum::<f64>();
        prop_assert!(dissipation(&op, &u, 2.0).unwrap().abs() <= 1e-12 * scale.max(1e-300));
    }
}

// ---- analysis ----

fn log_times() -> Vec<f64> {
    (0..=400).map(|i| 10f64.powf(-1.0 + 4.0 * i as f64 / 400.0)).collect()
}

fn problem(lambda1: f64, alpha: f64) -> EvolveProblem {
    let u0 = GridFunction::from_real_fn(grid(), |x| (PI * x).sin()).unwrap();
    let d = MixedDerivative::from_lambda1(lambda1, alpha).unwrap();
    EvolveProblem::new(Operator::FracLaplacian { sigma: 0.5 }, d, u0, 0.01, 1.0, Scheme::SemiImplicitL1)
}

proptest! {
    #[test]
    fn faster_power_decay_never_fails(alpha in 0.05..0.95f64, factor in 1.0..4.0f64, c in 1e-3..1e3f64) {
        let t = log_times();
        let y: Vec<f64> = t.iter().map(|t| c * t.powf(-factor * alpha)).collect();
        let r = build_report(&problem(1.0, alpha), 2.0, &t, &y, 1.0, &AnalysisSettings::default()).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn any_exponential_decay_passes_the_exponential_prediction(rate in 0.05..5.0f64, c in 1e-3..1e3f64) {
        let t: Vec<f64> = (0..=400).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| c * (-rate * t).exp()).collect();
        let r = build_report(&problem(0.0, 0.5), 2.0, &t, &y, 1.0, &AnalysisSettings::default()).unwrap();
        prop_assert!(r.pass);
    }

    #[test]
    fn power_fits_agree_on_nested_windows(p in 0.01..3.0f64, c in 1e-3..1e3f64, lo in 1.0..20.0f64) {
        let t = log_times();
        let y: Vec<f64> = t.iter().map(|t| c * t.powf(-p)).collect();
        let a = fit_power(&t, &y, (lo, 1e3)).unwrap();
        let b = fit_power(&t, &y, (2.0 * lo, 1e3)).unwrap();
        prop_assert!((a.rate - b.rate).abs() <= 2.0 * (a.stderr + b.stderr) + 1e-10);
        prop_assert!(a.stderr >= 0.0 && b.stderr >= 0.0);
    }

    #[test]
    fn classification_is_scale_invariant(p in 0.05..3.0f64, r in 0.001..0.05f64, pick in any::<bool>(), c in 1e-6..1e6f64) {
        let t = log_times();
        let y: Vec<f64> = if pick {
            t.iter().map(|t| t.powf(-p)).collect()
        } else {
            t.iter().map(|t| (-r * t).exp()).collect()
        };
        let scaled: Vec<f64> = y.iter().map(|v| c * v).collect();
        let a = classify_decay(&t, &y, None).unwrap();
        let b = classify_decay(&t, &scaled, None).unwrap();
        prop_assert_eq!(a.selected, b.selected);
        prop_assert!((a.power.rate - b.power.rate).abs() <= 1e-9 * (1.0 + a.power.rate.abs()));
        prop_assert!((a.exponential.rate - b.exponential.rate).abs() <= 1e-9 * (1.0 + a.exponential.rate.abs()));
    }
}

// ---- evolve ----

#[derive(Debug, Clone)]
enum Family {
    Lap,
    Frac(f64),
    Kirch(f64, f64),
    FracKirch(f64, f64, f64),
    Mag(Field),
    FracMag(f64, Field),
    Porous(f64),
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Lap),
        (0.1..0.9f64).prop_map(Family::Frac),
        (0.0..1.0f64, 0.0..1.0f64).prop_filter("m0 + b > 0", |(m, b)| m + b > 0.05).prop_map(|(m, b)| Family::Kirch(m, b)),
        (0.1..0.9f64, 0.0..1.0f64, 0.0..1.0f64)
            .prop_filter("m0 + b > 0", |(_, m, b)| m + b > 0.05)
            .prop_map(|(s, m, b)| Family::FracKirch(s, m, b)),
        field().prop_map(Family::Mag),
        (0.1..0.9f64, field()).prop_map(|(s, f)| Family::FracMag(s, f)),
        (0.1..0.45f64).prop_map(Family::Porous),
    ]
}

impl Family {
    fn operator(&self) -> Operator {
        match self.clone() {
            Family::Lap => Operator::Laplacian,
            Family::Frac(sigma) => Operator::FracLaplacian { sigma },
            Family::Kirch(m0, b) => Operator::Kirchhoff { m0, b },
            Family::FracKirch(sigma, m0, b) => Operator::FracKirchhoff { sigma, m0, b },
            Family::Mag(field) => Operator::Magnetic { field },
            Family::FracMag(sigma, field) => Operator::FracMagnetic { sigma, field },
            Family::Porous(sigma) => Operator::PorousMedium { sigma, epsilon: None, c_kernel: 1.0 },
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norms_never_increase(
        fam in family(),
        lambda1 in 0.0..=1.0f64,
        alpha in 0.2..0.9f64,
        amps in prop::collection::vec(0.0..1.0f64, 3),
        phase in 0.0..6.0f64,
    ) {
        prop_assume!(amps.iter().sum::<f64>() > 0.05);
        let op = fam.operator();
        let shape = modes(&amps);
        let u0 = match fam {
            Family::Mag(_) | Family::FracMag(..) => {
                GridFunction::from_fn(grid(), |x| C64::from_polar(shape(x), phase * x)).unwrap()
            }
            // positive data for the porous operator
            Family::Porous(_) => GridFunction::from_real_fn(grid(), |x| shape(x).abs() + (PI * x).sin()).unwrap(),
            _ => GridFunction::from_real_fn(grid(), &shape).unwrap(),
        };
        let peak = u0.moduli().into_iter().fold(0.0, f64::max);
        let d = MixedDerivative::from_lambda1(lambda1, alpha).unwrap();
        let p = EvolveProblem::new(op, d, u0, 0.01, 1.0, Scheme::SemiImplicitL1).with_norms(&[1.5, 2.0, 4.0]);
        let tr = evolve(&p).unwrap();
        let viol = tr.monotonicity_violations(1e-10);
        prop_assert!(viol.is_empty(), "{:?}", &viol[..viol.len().min(3)]);
        if let Family::Porous(_) = fam {
            prop_assert!(tr.min_real >= -1e-8 * peak, "min {}", tr.min_real);
        }
    }

    #[test]
    fn crank_nicolson_conserves_the_l2_norm(re in values(), im in values(), pot in field(), dt in 1e-3..0.05f64) {
        let u0 = complex_fn(&re, &im);
        prop_assume!(lebesgue_norm(&u0, 2.0).unwrap() > 1e-3);
        let op = Operator::SchrodingerControl { potential: pot };
        let d = MixedDerivative::new(0.0, 1.0, 0.5).unwrap();
        let tr = evolve(&EvolveProblem::new(op, d, u0, dt, 40.0 * dt, Scheme::CrankNicolson)).unwrap();
        let y = tr.norm_series(2.0).unwrap();
        for w in y.windows(2) {
            prop_assert!((w[1] / w[0] - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn laplacian_norm_stays_below_its_barrier(
        lambda1 in 0.2..=1.0f64,
        alpha in 0.2..0.9f64,
        amps in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        // ‖u‖₂² ≤ (1/λ_min) h Σ ū(-Δ_h u): structural inequality with γ = 1 and C = 1/λ_min
        prop_assume!(amps.iter().map(|a| a.abs()).sum::<f64>() > 0.05);
        let h = grid().h();
        let lambda_min = (2.0 / h * (PI * h / 2.0).sin()).powi(2);
        let u0 = GridFunction::from_real_fn(grid(), modes(&amps)).unwrap();
        let n0 = lebesgue_norm(&u0, 2.0).unwrap();
        let d = MixedDerivative::from_lambda1(lambda1, alpha).unwrap();
        let tr = evolve(&EvolveProblem::new(Operator::Laplacian, d, u0, 0.01, 5.0, Scheme::SemiImplicitL1)).unwrap();
        let b = mixed_power_barrier(n0, alpha, 1.0, lambda_min).unwrap();
        for (t, y) in tr.t.iter().zip(tr.norm_series(2.0).unwrap()) {
            prop_assert!(*y <= b.value(*t) * (1.0 + 1e-12), "t = {t}: {y} > {}", b.value(*t));
        }
    }
}
