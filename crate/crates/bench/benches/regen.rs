use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use multiregen_core::rng::{stream, unit_complex};
use multiregen_core::tracker::{track_path, track_path_checked, Homotopy, MovingEquation, PatchSet};
use multiregen_core::{
    parse_equations, parse_variables, run, Complex64, MultiprojectivePoint, PolySystem, RegenConfig, TrackSettings,
};

const TWISTED_CUBIC_VARS: &str = "hom_variable_group x_0, x_1, x_2, x_3;\n";
const TWISTED_CUBIC_EQS: &str =
    "function f1, f2, f3;\nf1 = x_1^2 - x_0*x_2; f2 = x_2^2 - x_1*x_3; f3 = x_0*x_3 - x_1*x_2;\n";
const P3P1_VARS: &str = "hom_variable_group x_0, x_1, x_2, x_3;\nhom_variable_group y_0, y_1;\n";
const P3P1_EQS: &str = "function f1, f2, f3;
f1 = x_0*y_0 + x_1*y_1;
f2 = x_1*y_0 + x_2*y_1;
f3 = x_2*y_0 + x_3*y_1;
";

fn system(vars: &str, eqs: &str) -> PolySystem {
    parse_equations(eqs, &parse_variables(vars).unwrap()).unwrap()
}

fn evaluation(c: &mut Criterion) {
    let sys = system(P3P1_VARS, P3P1_EQS);
    let mut rng = stream(1, &[]);
    let x: Vec<Complex64> = (0..sys.groups().total_vars()).map(|_| unit_complex(&mut rng)).collect();
    let p = MultiprojectivePoint::from_flat(sys.groups(), &x).unwrap();
    c.bench_function("evaluate p3p1", |b| b.iter(|| sys.evaluate(black_box(&p)).unwrap()));
    c.bench_function("jacobian p3p1", |b| b.iter(|| sys.jacobian(black_box(&p)).unwrap()));
}

fn tracking(c: &mut Criterion) {
    let vars = "variable_group x, y;";
    let sys = system(vars, "function c, l0, l1;\nc = x^2 + y^2 - 1;\nl0 = y - 0.3;\nl1 = x - 0.5*y - 0.2;\n");
    let g = sys.groups().clone();
    let h = Homotopy::new(
        vec![sys.polys()[0].clone()],
        vec![MovingEquation {
            start: sys.polys()[1].clone(),
            target: sys.polys()[2].clone(),
            gamma: unit_complex(&mut stream(9, &[])),
        }],
        g.clone(),
    )
    .unwrap();
    let patches = PatchSet::random(&g, &mut stream(1, &[]));
    let start = MultiprojectivePoint::new(vec![vec![Complex64::new(0.91f64.sqrt(), 0.0), Complex64::new(0.3, 0.0)]]);
    let s = TrackSettings::default();
    c.bench_function("track_path circle", |b| b.iter(|| track_path(&h, &patches, black_box(&start), &s).unwrap()));
    c.bench_function("track_path_checked circle", |b| {
        b.iter(|| track_path_checked(&h, &patches, black_box(&start), &s).unwrap())
    });
}

fn full_runs(c: &mut Criterion) {
    let cubic = system(TWISTED_CUBIC_VARS, TWISTED_CUBIC_EQS);
    let p3p1 = system(P3P1_VARS, P3P1_EQS);
    c.bench_function("run twisted cubic", |b| b.iter(|| run(&cubic, RegenConfig::for_system(&cubic, 1)).unwrap()));
    c.bench_function("run p3p1", |b| b.iter(|| run(&p3p1, RegenConfig::for_system(&p3p1, 1)).unwrap()));
    c.bench_function("run p3p1 4 workers", |b| {
        b.iter(|| {
            let mut cfg = RegenConfig::for_system(&p3p1, 1);
            cfg.max_processes = 4;
            run(&p3p1, cfg).unwrap()
        })
    });
}

criterion_group!(benches, evaluation, tracking, full_runs);
criterion_main!(benches);
