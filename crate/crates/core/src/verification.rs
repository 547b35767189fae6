//! Six-level verification gate. Every level is always evaluated so rejected
//! samples carry a full diagnosis; a sample is accepted only when all pass.

use serde::{Deserialize, Serialize};

use crate::domain::{BeamFields, ShaftSpec};
use crate::fatigue::FatigueReport;
use crate::oracle::{max_relative_deflection_gap, numerical_oracle};
use crate::scalar::{argmax_abs, max_abs, Scalar};
use crate::solver::solve;
use crate::stress::{yield_analysis, StressReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelId {
    Schema,
    Equilibrium,
    Boundary,
    CrossOracle,
    Benchmark,
    Plausibility,
}

impl LevelId {
    pub const ALL: [LevelId; 6] = [
        LevelId::Schema,
        LevelId::Equilibrium,
        LevelId::Boundary,
        LevelId::CrossOracle,
        LevelId::Benchmark,
        LevelId::Plausibility,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LevelId::Schema => "schema",
            LevelId::Equilibrium => "equilibrium",
            LevelId::Boundary => "boundary",
            LevelId::CrossOracle => "cross_oracle",
            LevelId::Benchmark => "benchmark",
            LevelId::Plausibility => "plausibility",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: LevelId,
    pub passed: bool,
    pub detail: String,
    /// Worst dimensionless residual; `+inf` (serialized as null) when the
    /// inputs were not even finite.
    #[serde(with = "crate::serde_ext::inf_as_null")]
    pub metric: f64,
}

impl LevelResult {
    fn new(level: LevelId, passed: bool, metric: f64, detail: impl Into<String>) -> Self {
        let metric = if metric.is_nan() { f64::INFINITY } else { metric.abs() };
        LevelResult {
            level,
            passed,
            detail: detail.into(),
            metric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub level_results: Vec<LevelResult>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn from_results(level_results: Vec<LevelResult>) -> Self {
        let overall = level_results.iter().all(|r| r.passed);
        VerificationReport { level_results, overall }
    }

    pub fn first_failure(&self) -> Option<&LevelResult> {
        self.level_results.iter().find(|r| !r.passed)
    }

    pub fn get(&self, level: LevelId) -> Option<&LevelResult> {
        self.level_results.iter().find(|r| r.level == level)
    }
}

/// Tolerances and plausibility bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerificationConfig {
    pub equilibrium_tol: f64,
    pub boundary_tol: f64,
    pub cross_oracle_tol: f64,
    pub benchmark_tol: f64,
    pub oracle_grid: usize,
    /// Largest deflection allowed is `L / max_deflection_ratio`.
    pub max_deflection_ratio: f64,
    pub min_yield_safety: f64,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        VerificationConfig {
            equilibrium_tol: 1e-9,
            boundary_tol: 1e-9,
            cross_oracle_tol: 1e-3,
            benchmark_tol: 1e-6,
            oracle_grid: 2048,
            max_deflection_ratio: 50.0,
            min_yield_safety: 0.2,
        }
    }
}

impl VerificationConfig {
    /// Multiplies every numerical tolerance by `factor`; plausibility bounds
    /// are left alone.
    pub fn scaled(self, factor: f64) -> Self {
        VerificationConfig {
            equilibrium_tol: self.equilibrium_tol * factor,
            boundary_tol: self.boundary_tol * factor,
            cross_oracle_tol: self.cross_oracle_tol * factor,
            benchmark_tol: self.benchmark_tol * factor,
            ..self
        }
    }
}

/// Reports produced by the analysis level, if any.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Reports<T> {
    pub stress: Option<StressReport<T>>,
    pub fatigue: Option<FatigueReport<T>>,
}

fn f64s<T: Scalar>(v: T) -> f64 {
    v.to_f64_lossy()
}

pub fn verify_schema<T: Scalar>(spec: &ShaftSpec<T>, fields: &BeamFields<T>, reports: &Reports<T>) -> LevelResult {
    let fail = |detail: String| LevelResult::new(LevelId::Schema, false, 1.0, detail);
    if let Err(e) = spec.validate() {
        return fail(format!("spec: {e}"));
    }
    if let Err(e) = fields.check_shape() {
        return fail(format!("fields: {e}"));
    }
    if fields.x[0] != T::zero() || fields.x[fields.len() - 1] != spec.length {
        return fail("fields: grid does not span [0, L]".into());
    }
    if let Some(s) = &reports.stress {
        let n_ok = s.n_yield.is_finite() || (s.unstressed && s.n_yield.is_infinite());
        if !(s.sigma_vm_max.is_finite() && s.sigma_vm_max >= T::zero() && n_ok) {
            return fail("stress report has non-finite values".into());
        }
    }
    if let Some(f) = &reports.fatigue {
        let finite = f.factors.as_array().iter().all(|k| k.is_finite() && *k > T::zero())
            && f.se.is_finite()
            && f.sigma_a_eq.is_finite()
            && f.sigma_m_eq.is_finite()
            && !f.n_fatigue.is_nan();
        if !finite {
            return fail("fatigue report has non-finite values".into());
        }
    }
    LevelResult::new(LevelId::Schema, true, 0.0, "spec, fields and reports well formed")
}

/// Reaction balance, moment balance about `x = 0`, and `dM/dx = V` on every
/// grid interval.
pub fn verify_equilibrium<T: Scalar>(spec: &ShaftSpec<T>, fields: &BeamFields<T>, tol: f64) -> LevelResult {
    if let Err(e) = fields.check_shape() {
        return LevelResult::new(LevelId::Equilibrium, false, f64::INFINITY, e);
    }
    let n = fields.len();
    let r1 = f64s(fields.shear[0]);
    let r2 = -f64s(fields.shear[n - 1]);
    let total: f64 = spec.loads.iter().map(|p| f64s(p.magnitude)).sum();
    let first_moment: f64 = spec.loads.iter().map(|p| f64s(p.magnitude) * f64s(p.position)).sum();
    let abs_total: f64 = spec.loads.iter().map(|p| f64s(p.magnitude).abs()).sum();
    let scale = if abs_total > 0.0 { abs_total } else { 1.0 };
    let l = f64s(spec.length);

    let force = (r1 + r2 - total).abs() / scale;
    let moment = (r2 * l - first_moment).abs() / (scale * l);

    let v_scale = {
        let m = f64s(max_abs(&fields.shear));
        if m > 0.0 {
            m
        } else {
            scale
        }
    };
    let mut slope = 0.0_f64;
    for i in 0..n - 1 {
        let dx = f64s(fields.x[i + 1] - fields.x[i]);
        let dm = f64s(fields.moment[i + 1]) - f64s(fields.moment[i]);
        let r = (dm / dx - f64s(fields.shear[i + 1])).abs() / v_scale;
        slope = if r.is_nan() { f64::INFINITY } else { slope.max(r) };
    }

    let passed = force <= tol && moment <= tol && slope <= tol;
    LevelResult::new(
        LevelId::Equilibrium,
        passed,
        force.max(moment).max(slope),
        format!("force {force:.3e}, moment {moment:.3e}, dM/dx-V {slope:.3e} (tol {tol:.1e})"),
    )
}

/// Simple-support conditions `w = 0` and `M = 0` at both ends.
pub fn verify_boundary<T: Scalar>(fields: &BeamFields<T>, tol: f64) -> LevelResult {
    if let Err(e) = fields.check_shape() {
        return LevelResult::new(LevelId::Boundary, false, f64::INFINITY, e);
    }
    let n = fields.len();
    let ratio = |v: &[T]| {
        let peak = f64s(max_abs(v));
        let ends = f64s(v[0].abs().max(v[n - 1].abs()));
        if ends.is_nan() || peak.is_nan() {
            f64::INFINITY
        } else if ends == 0.0 {
            0.0
        } else if peak == 0.0 {
            f64::INFINITY
        } else {
            ends / peak
        }
    };
    let w = ratio(&fields.deflection);
    let m = ratio(&fields.moment);
    LevelResult::new(
        LevelId::Boundary,
        w <= tol && m <= tol,
        w.max(m),
        format!("end deflection {w:.3e}, end moment {m:.3e} relative to peak (tol {tol:.1e})"),
    )
}

/// Solves twice, closed form and quadrature, and compares deflections.
pub fn verify_cross_oracle<T: Scalar>(spec: &ShaftSpec<T>, tol: f64, n_grid: usize) -> LevelResult {
    let pair = solve(spec, n_grid).and_then(|a| Ok((a, numerical_oracle(spec, n_grid)?)));
    match pair {
        Ok((closed, oracle)) => {
            let gap = f64s(max_relative_deflection_gap(&closed, &oracle));
            LevelResult::new(
                LevelId::CrossOracle,
                gap <= tol,
                gap,
                format!("max deflection gap {gap:.3e} of peak at {n_grid} points (tol {tol:.1e})"),
            )
        }
        Err(e) => LevelResult::new(LevelId::CrossOracle, false, f64::INFINITY, format!("solver failed: {e}")),
    }
}

/// Single-load specs are compared against handbook deflections; anything
/// else is reported as not applicable.
///
/// ```text
/// midspan:     w_max = P L^3 / (48 E I) + P L / (4 kappa G A)
/// off-centre:  w(a)  = P a^2 b^2 / (3 E I L) + P a b / (L kappa G A)
/// ```
pub fn verify_benchmark<T: Scalar>(spec: &ShaftSpec<T>, fields: &BeamFields<T>, tol: f64) -> LevelResult {
    if spec.loads.len() != 1 {
        return LevelResult::new(LevelId::Benchmark, true, 0.0, "not applicable (more than one load)");
    }
    if let Err(e) = fields.check_shape() {
        return LevelResult::new(LevelId::Benchmark, false, f64::INFINITY, e);
    }
    let load = spec.loads[0];
    let (p, a, l, d) = (f64s(load.magnitude), f64s(load.position), f64s(spec.length), f64s(spec.diameter));
    let e = f64s(spec.material.youngs_modulus);
    let nu = f64s(spec.material.poisson_ratio);
    let g = e / (2.0 * (1.0 + nu));
    let pi = std::f64::consts::PI;
    let inertia = pi * d.powi(4) / 64.0;
    let area = pi * d * d / 4.0;
    let kappa = 6.0 * (1.0 + nu) / (7.0 + 6.0 * nu);
    let b = l - a;

    let (case, expected, actual) = if (a - 0.5 * l).abs() <= 1e-12 * l {
        let expected = p * l.powi(3) / (48.0 * e * inertia) + p * l / (4.0 * kappa * g * area);
        let actual = argmax_abs(&fields.deflection).map_or(f64::NAN, |(_, w)| f64s(w));
        ("midspan", expected, actual)
    } else {
        let expected = p * a * a * b * b / (3.0 * e * inertia * l) + p * a * b / (l * kappa * g * area);
        let Some(i) = fields.x.iter().position(|&x| f64s(x) == a) else {
            return LevelResult::new(LevelId::Benchmark, false, f64::INFINITY, "load point is not on the grid");
        };
        ("off-centre", expected, f64s(fields.deflection[i]))
    };
    let scale = expected.abs().max(actual.abs());
    let rel = if scale == 0.0 { 0.0 } else { (expected - actual).abs() / scale };
    let rel = if rel.is_nan() { f64::INFINITY } else { rel };
    LevelResult::new(
        LevelId::Benchmark,
        rel <= tol,
        rel,
        format!("{case} benchmark {expected:.6e} m vs {actual:.6e} m, relative {rel:.3e} (tol {tol:.1e})"),
    )
}

/// Rejects non-finite fields, deflections above `L / ratio` and yield safety
/// below the configured floor. The metric is the worse of the two
/// utilisations, so a value above 1 means rejection.
pub fn verify_plausibility<T: Scalar>(
    spec: &ShaftSpec<T>,
    fields: &BeamFields<T>,
    config: &VerificationConfig,
) -> LevelResult {
    if !fields.all_finite() {
        return LevelResult::new(LevelId::Plausibility, false, f64::INFINITY, "fields contain non-finite values");
    }
    let w = f64s(max_abs(&fields.deflection));
    let allowed = f64s(spec.length) / config.max_deflection_ratio;
    let n_yield = match yield_analysis(spec, fields) {
        Ok(r) => f64s(r.n_yield),
        Err(e) => return LevelResult::new(LevelId::Plausibility, false, f64::INFINITY, e.to_string()),
    };
    let deflection_use = w / allowed;
    let yield_use = config.min_yield_safety / n_yield;
    let passed = w <= allowed && n_yield >= config.min_yield_safety;
    LevelResult::new(
        LevelId::Plausibility,
        passed,
        deflection_use.max(yield_use),
        format!(
            "max deflection {w:.3e} m (limit L/{} = {allowed:.3e} m), yield safety {n_yield:.3} (floor {})",
            config.max_deflection_ratio, config.min_yield_safety
        ),
    )
}

pub fn verify_all<T: Scalar>(
    spec: &ShaftSpec<T>,
    fields: &BeamFields<T>,
    reports: &Reports<T>,
    config: &VerificationConfig,
) -> VerificationReport {
    VerificationReport::from_results(vec![
        verify_schema(spec, fields, reports),
        verify_equilibrium(spec, fields, config.equilibrium_tol),
        verify_boundary(fields, config.boundary_tol),
        verify_cross_oracle(spec, config.cross_oracle_tol, config.oracle_grid),
        verify_benchmark(spec, fields, config.benchmark_tol),
        verify_plausibility(spec, fields, config),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::tests::{midspan, spec_with};

    fn two_loads() -> ShaftSpec<f64> {
        spec_with(&[(0.3, 600.0), (0.7, 400.0)])
    }

    #[test]
    fn solver_output_is_in_equilibrium() {
        for s in [midspan(), two_loads(), spec_with(&[(0.123, 50.0), (0.61, -20.0), (0.9, 75.0)])] {
            let f = solve(&s, 257).unwrap();
            let r = verify_equilibrium(&s, &f, 1e-9);
            assert!(r.passed, "{}", r.detail);
        }
    }

    #[test]
    fn midspan_reaction_residual_is_tiny() {
        let s = midspan();
        let r = verify_equilibrium(&s, &solve(&s, 257).unwrap(), 1e-9);
        assert!(r.metric <= 1e-12, "{}", r.detail);
    }

    #[test]
    fn corrupted_shear_fails_slope_check() {
        let s = two_loads();
        let mut f = solve(&s, 257).unwrap();
        for v in &mut f.shear {
            *v *= 1.01;
        }
        let r = verify_equilibrium(&s, &f, 1e-9);
        assert!(!r.passed);
        assert!(r.detail.contains("dM/dx-V 9.9"), "{}", r.detail);
    }

    #[test]
    fn boundary_checks() {
        let s = two_loads();
        let f = solve(&s, 257).unwrap();
        assert!(verify_boundary(&f, 1e-9).passed);
        let mut shifted = f.clone();
        for w in &mut shifted.deflection {
            *w += 1e-6;
        }
        assert!(!verify_boundary(&shifted, 1e-9).passed);
        let oracle = numerical_oracle(&s, 1024).unwrap();
        assert!(verify_boundary(&oracle, 1e-6).passed);
    }

    #[test]
    fn cross_oracle_passes_and_is_deterministic() {
        let s = two_loads();
        let a = verify_cross_oracle(&s, 1e-3, 2048);
        assert!(a.passed, "{}", a.detail);
        assert_eq!(a, verify_cross_oracle(&s, 1e-3, 2048));
        let mut slender = two_loads();
        slender.diameter = 0.01;
        let b = verify_cross_oracle(&slender, 1e-3, 2048);
        assert!(b.passed);
        assert!(b.metric < 1e-3);
    }

    #[test]
    fn benchmark_cases() {
        let s = midspan();
        let r = verify_benchmark(&s, &solve(&s, 257).unwrap(), 1e-6);
        assert!(r.passed && r.detail.starts_with("midspan"), "{}", r.detail);

        let s = spec_with(&[(0.3, 800.0)]);
        let r = verify_benchmark(&s, &solve(&s, 257).unwrap(), 1e-6);
        assert!(r.passed && r.detail.starts_with("off-centre"), "{}", r.detail);

        let s = two_loads();
        let r = verify_benchmark(&s, &solve(&s, 257).unwrap(), 1e-6);
        assert!(r.passed && r.detail.starts_with("not applicable"));

        // Fields solved with the wrong modulus.
        let s = midspan();
        let mut wrong = s.clone();
        wrong.material.youngs_modulus *= 1.05;
        let r = verify_benchmark(&s, &solve(&wrong, 257).unwrap(), 1e-6);
        assert!(!r.passed);
    }

    #[test]
    fn plausibility_cases() {
        let cfg = VerificationConfig::default();
        let s = two_loads();
        let f = solve(&s, 257).unwrap();
        assert!(verify_plausibility(&s, &f, &cfg).passed);

        let mut nan = f.clone();
        nan.deflection[10] = f64::NAN;
        assert!(!verify_plausibility(&s, &nan, &cfg).passed);

        let mut sagging = f.clone();
        sagging.deflection[100] = 0.1;
        assert!(!verify_plausibility(&s, &sagging, &cfg).passed);

        let heavy = s.scaled_loads(1e4);
        let r = verify_plausibility(&heavy, &solve(&heavy, 257).unwrap(), &cfg);
        assert!(!r.passed && r.metric > 1.0);
    }

    #[test]
    fn verify_all_orders_levels_and_conjoins() {
        let s = midspan();
        let f = solve(&s, 257).unwrap();
        let cfg = VerificationConfig::default();
        let r = verify_all(&s, &f, &Reports::default(), &cfg);
        assert!(r.overall);
        let order: Vec<_> = r.level_results.iter().map(|l| l.level).collect();
        assert_eq!(order, LevelId::ALL);

        let mut bad = f.clone();
        bad.deflection[0] = 1e-3;
        let r = verify_all(&s, &bad, &Reports::default(), &cfg);
        assert!(!r.overall);
        assert_eq!(r.level_results.len(), 6);
        let json_a = serde_json::to_string(&r).unwrap();
        let json_b = serde_json::to_string(&verify_all(&s, &bad, &Reports::default(), &cfg)).unwrap();
        assert_eq!(json_a, json_b);
    }

    #[test]
    fn tightening_never_rescues_a_failure() {
        let s = two_loads();
        let mut f = solve(&s, 257).unwrap();
        f.deflection[0] = 1e-9;
        let cfg = VerificationConfig::default();
        let loose = verify_all(&s, &f, &Reports::default(), &cfg);
        let tight = verify_all(&s, &f, &Reports::default(), &cfg.scaled(0.01));
        for (l, t) in loose.level_results.iter().zip(&tight.level_results) {
            assert!(l.passed || !t.passed);
        }
    }
}
