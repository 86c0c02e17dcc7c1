use odeco_frames::mesh::generate::{annulus, unit_square};
use odeco_frames::param::{check_seamless, index_budget};
use odeco_frames::pipeline::compare;
use odeco_frames::solver::{BoundaryConstraints, ScheduleConfig, SizeSpec};

fn graded_square(n: usize, top: f64) -> (odeco_frames::TriMesh, BoundaryConstraints) {
    let mesh = unit_square(n);
    let c = BoundaryConstraints::uniform(&mesh, 1.0)
        .with("top", SizeSpec::Constant(top))
        .with("right", SizeSpec::Linear { start: 1.0, end: top })
        .with("left", SizeSpec::Linear { start: top, end: 1.0 });
    (mesh, c)
}

#[test]
fn graded_square_balances_its_indices() {
    let (mesh, c) = graded_square(14, 2.0);
    let run = compare(&mesh, &c, true, &ScheduleConfig::default()).unwrap();
    for p in [&run.smooth_param, &run.integrable_param] {
        let budget = index_budget(&mesh, &p.singularities);
        assert!(budget.balanced(), "{budget:?}");
        assert_eq!(budget.corners, 1.0);
        assert!(check_seamless(&mesh, p).passed());
    }
    assert!(!run.integrable_param.singularities.is_empty());
    assert!(run.comparison.ratio > 1.0, "{:?}", run.comparison);
}

#[test]
fn annulus_indices_sum_to_zero() {
    let mesh = annulus(0.5, 1.0, 48, 8);
    let c = BoundaryConstraints::uniform(&mesh, 1.0).with("inner", SizeSpec::Constant(2.0));
    let run = compare(&mesh, &c, true, &ScheduleConfig::default()).unwrap();
    let budget = index_budget(&mesh, &run.integrable_param.singularities);
    assert_eq!(budget.euler, 0);
    assert!(budget.balanced(), "{budget:?}");
    assert!(check_seamless(&mesh, &run.integrable_param).passed());
}

#[test]
fn uniform_sizes_need_no_cuts() {
    let (mesh, c) = graded_square(8, 1.0);
    let run = compare(&mesh, &c, true, &ScheduleConfig::default()).unwrap();
    assert!(run.comparison.both_negligible);
    assert_eq!(run.comparison.ratio, 1.0);
    assert!(run.integrable_param.cut_edges.is_empty());
}
