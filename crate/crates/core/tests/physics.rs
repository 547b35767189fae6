//! Cross-cutting physical properties of the solver.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use shaftlab_core::domain::SurfaceFinish;
use shaftlab_core::oracle::max_relative_deflection_gap;
use shaftlab_core::solver::ClosedForm;
use shaftlab_core::{
    build_grid, numerical_oracle, solve, solve_on_grid, Material, PointLoad, ShaftSpec, TorquePair,
    SPEC_SCHEMA_VERSION,
};

fn steel() -> Material {
    Material {
        name: "steel".into(),
        youngs_modulus: 200e9,
        poisson_ratio: 0.3,
        yield_strength: 350e6,
        ultimate_strength: 600e6,
        surface_finish: SurfaceFinish::Machined,
    }
}

fn random_spec(rng: &mut impl Rng, i: usize) -> ShaftSpec {
    let length = rng.random_range(0.3..2.0);
    let diameter = rng.random_range(0.02..(length / 5.0_f64).min(0.1));
    let loads = (0..rng.random_range(1..=3))
        .map(|_| PointLoad {
            position: rng.random_range(0.05..0.95) * length,
            magnitude: rng.random_range(100.0..5000.0),
        })
        .collect();
    ShaftSpec {
        schema_version: SPEC_SCHEMA_VERSION,
        id: format!("rand-{i}"),
        length,
        diameter,
        loads,
        torque: Some(TorquePair::new(0.1 * length, 0.9 * length, 100.0)),
        material: steel(),
    }
}

#[test]
fn oracle_agrees_on_random_specs() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    for i in 0..100 {
        let s = random_spec(&mut rng, i);
        let gap = max_relative_deflection_gap(&solve(&s, 2048).unwrap(), &numerical_oracle(&s, 2048).unwrap());
        assert!(gap < 1e-3, "spec {i}: {gap}");
    }
}

#[test]
fn superposition_of_load_sets() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    for i in 0..20 {
        let a = random_spec(&mut rng, i);
        let mut b = a.clone();
        b.loads = random_spec(&mut rng, i).loads.iter().map(|p| PointLoad {
            position: p.position.min(0.95 * a.length),
            magnitude: p.magnitude,
        }).collect();
        let mut union = a.clone();
        union.loads.extend(b.loads.iter().copied());

        let grid = build_grid(&union, 257).unwrap();
        let fu = solve_on_grid(&union, &grid).unwrap();
        let fa = solve_on_grid(&a, &grid).unwrap();
        let fb = solve_on_grid(&b, &grid).unwrap();
        let peak = fu.deflection.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        for k in 0..grid.len() {
            let sum = fa.deflection[k] + fb.deflection[k];
            assert!((fu.deflection[k] - sum).abs() <= 1e-9 * peak);
            let msum = fa.moment[k] + fb.moment[k];
            let mpeak = fu.moment.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!((fu.moment[k] - msum).abs() <= 1e-9 * mpeak);
        }
    }
}

fn midspan_with_ratio(ratio: f64) -> ShaftSpec {
    ShaftSpec {
        schema_version: SPEC_SCHEMA_VERSION,
        id: "slender".into(),
        length: 1.0,
        diameter: ratio,
        loads: vec![PointLoad { position: 0.5, magnitude: 1000.0 }],
        torque: None,
        material: steel(),
    }
}

#[test]
fn slender_limit() {
    let mut last = f64::INFINITY;
    for ratio in [0.1, 0.05, 0.02, 0.01] {
        let s = midspan_with_ratio(ratio);
        let cf = ClosedForm::new(&s).unwrap();
        let fraction = cf.shear_deflection(0.5) / cf.deflection(0.5);
        assert!(fraction < last);
        last = fraction;
        if ratio == 0.01 {
            let eb = cf.bending_deflection(0.5);
            assert!((cf.deflection(0.5) - eb).abs() / eb < 0.01);
        }
    }
}

#[test]
fn moment_slope_matches_shear_away_from_loads() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
    let s = random_spec(&mut rng, 0);
    let f = solve(&s, 513).unwrap();
    let vmax = f.shear.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for i in 1..f.len() {
        let slope = (f.moment[i] - f.moment[i - 1]) / (f.x[i] - f.x[i - 1]);
        assert!((slope - f.shear[i]).abs() < 1e-9 * vmax);
    }
}
