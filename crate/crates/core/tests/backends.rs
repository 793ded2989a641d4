mod common;

use poroshell::basis::{ClampedEdges, PlateBasis};
use poroshell::cylinder::{assemble_cylinder, CylinderAssembler, CylinderConfig};
use poroshell::diagnostics::contact_forces;
use poroshell::geometry::{Chart, PlateChart, Rect};
use poroshell::loads::{AffineProfile, Face, LoadProgram, TimeSeries, TractionTerm};
use poroshell::material::{DimensionlessParams, ModelCoefficients};
use poroshell::multiplier::assemble_constrained;
use poroshell::quadrature::OmegaQuadrature;
use poroshell::solver::{assemble, simulate, SimulationOptions};
use poroshell::{Execution, ShellError};

fn setup() -> (Rect, ModelCoefficients, LoadProgram) {
    let rect = Rect::new([0.0, 0.0], [1.0, 1.5]);
    let c = ModelCoefficients::dimensionless(&DimensionlessParams::from_ratios(1.0, 0.7, 0.5));
    let loads = LoadProgram {
        traction: vec![TractionTerm {
            face: Face::Upper,
            component: 3,
            profile: AffineProfile { c0: 1.0, c1: 0.5, c2: -0.3 },
            series: TimeSeries::Ramp { slope: 2.0 },
        }],
        flux: LoadProgram::ramp_flux(0.5).flux,
        allow_nonzero_initial: false,
    };
    (rect, c, loads)
}

#[test]
fn multiplier_backend_reproduces_reduced_plate() {
    let (rect, c, loads) = setup();
    let quad = OmegaQuadrature::tensor(rect, [3, 3], [4, 4]);
    let chart = PlateChart { rect };
    let basis = PlateBasis::new(rect, [3, 3], ClampedEdges::default()).unwrap();
    let reduced = assemble(&chart, &basis, &quad, c, 12, &loads, Execution::Parallel).unwrap();
    let constrained =
        assemble_constrained(&chart, [3, 3], ClampedEdges::default(), &quad, c, 12, &loads, Execution::Parallel)
            .unwrap();
    assert_eq!(constrained.dimension(), reduced.dimension());
    assert!(constrained.constraint.as_ref().unwrap().constraint_residual < 1e-10);

    let opts = SimulationOptions::new(0.05, 0.5);
    let a = simulate(&reduced, &opts).unwrap();
    let b = simulate(&constrained, &opts).unwrap();
    let scale = a.final_state.pressure.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    for (x, y) in a.final_state.pressure.iter().zip(&b.final_state.pressure) {
        assert!((x - y).abs() < 1e-9 * scale);
    }
    for n in 0..reduced.node_count() {
        let x = reduced.displacement_at(&a.final_state.u, n);
        let y = constrained.displacement_at(&b.final_state.u, n);
        for k in 0..3 {
            assert!((x[k] - y[k]).abs() < 1e-9, "node {n} component {k}: {} vs {}", x[k], y[k]);
        }
    }
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert!((ra.elastic_energy - rb.elastic_energy).abs() < 1e-9 * ra.elastic_energy.max(1e-12));
    }
}

#[test]
fn contact_forces_only_from_multiplier_backend() {
    let (rect, c, loads) = setup();
    let quad = OmegaQuadrature::tensor(rect, [2, 2], [4, 4]);
    let chart = PlateChart { rect };
    let basis = PlateBasis::new(rect, [2, 2], ClampedEdges::default()).unwrap();
    let reduced = assemble(&chart, &basis, &quad, c, 6, &loads, Execution::Sequential).unwrap();
    let h = simulate(&reduced, &SimulationOptions::new(0.1, 0.2)).unwrap();
    assert!(matches!(contact_forces(&h.final_state), Err(ShellError::UnavailableOutput(_))));

    let constrained =
        assemble_constrained(&chart, [2, 2], ClampedEdges::default(), &quad, c, 6, &loads, Execution::Sequential)
            .unwrap();
    let h = simulate(&constrained, &SimulationOptions::new(0.1, 0.2)).unwrap();
    let n = contact_forces(&h.final_state).unwrap();
    assert_eq!(n.len(), quad.len());
    assert!(n.iter().all(|t| t.t11.is_finite() && t.t12.is_finite() && t.t22.is_finite()));
}

#[test]
fn partially_clamped_plate_is_stiffer_with_more_clamps() {
    let (rect, c, loads) = setup();
    let quad = OmegaQuadrature::tensor(rect, [3, 3], [4, 4]);
    let chart = PlateChart { rect };
    let peak = |clamped: ClampedEdges| {
        let basis = PlateBasis::new(rect, [3, 3], clamped).unwrap();
        let sys = assemble(&chart, &basis, &quad, c, 6, &loads, Execution::Parallel).unwrap();
        let h = simulate(&sys, &SimulationOptions::new(0.1, 0.5)).unwrap();
        (0..sys.node_count())
            .map(|n| sys.displacement_at(&h.final_state.u, n)[2].abs())
            .fold(0.0, f64::max)
    };
    let all = peak(ClampedEdges::default());
    let cantilever = peak(ClampedEdges {
        y1_lo: true,
        y1_hi: false,
        y2_lo: false,
        y2_hi: false,
    });
    assert!(cantilever > all, "cantilever {cantilever} vs clamped {all}");
}

#[test]
fn unclamped_plate_has_rigid_modes() {
    let (rect, c, loads) = setup();
    let quad = OmegaQuadrature::tensor(rect, [2, 2], [4, 4]);
    let none = ClampedEdges {
        y1_lo: false,
        y1_hi: false,
        y2_lo: false,
        y2_hi: false,
    };
    let basis = PlateBasis::new(rect, [2, 2], none).unwrap();
    let sys = assemble(&PlateChart { rect }, &basis, &quad, c, 6, &loads, Execution::Sequential).unwrap();
    assert!(matches!(
        simulate(&sys, &SimulationOptions::new(0.1, 0.2)),
        Err(ShellError::SingularSystem { .. })
    ));
}

/// The pointwise-constrained space locks on curved charts, but the elastic
/// energy must still approach the exact-reduction cylinder result as the
/// mesh is refined.
#[test]
fn multiplier_cylinder_approaches_reduced_energy() {
    let cfg = CylinderConfig {
        radius: 1.0,
        length: 2.0,
        angle: 2.0,
    };
    let c = ModelCoefficients::dimensionless(&DimensionlessParams::from_ratios(1.0, 1.0, 1.0));
    let mut loads = LoadProgram::ramp_flux(1.0);
    loads.traction.push(TractionTerm {
        face: Face::Upper,
        component: 3,
        profile: AffineProfile { c0: 1.0, c1: 0.0, c2: 0.3 },
        series: TimeSeries::Ramp { slope: 1.0 },
    });
    let opts = SimulationOptions::new(0.05, 0.5);
    let energy = |sys: &poroshell::solver::CoupledSystem| simulate(sys, &opts).unwrap().records.last().unwrap().elastic_energy;

    let (_, reduced) =
        assemble_cylinder(&cfg, 12, c, 16, &loads, CylinderAssembler::ClosedForm, Execution::Parallel).unwrap();
    let exact = energy(&reduced);

    let chart = cfg.chart();
    let generatrices = ClampedEdges {
        y1_lo: false,
        y1_hi: false,
        y2_lo: true,
        y2_hi: true,
    };
    let errors: Vec<f64> = [[2, 4], [3, 8], [4, 12]]
        .iter()
        .map(|&n| {
            let quad = OmegaQuadrature::tensor(chart.domain(), n, [4, 4]);
            let sys = assemble_constrained(&chart, n, generatrices, &quad, c, 16, &loads, Execution::Parallel).unwrap();
            assert!(sys.constraint.as_ref().unwrap().constraint_residual < 1e-10);
            (energy(&sys) - exact).abs() / exact
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    // Angular mesh size ratios 2 and 1.5; expect roughly second order.
    let order = (errors[1] / errors[2]).ln() / 1.5f64.ln();
    assert!(order > 1.5, "order {order}, errors {errors:?}");
    assert!(errors[2] < 0.15, "{errors:?}");
}
