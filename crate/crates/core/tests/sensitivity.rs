use sdpsense::facial::{facial_reduction, restrict_to_face, FacialConfig};
use sdpsense::fixtures::{expprimal, perturbation_family, Perturbation};
use sdpsense::hinf::{matrixwise_family, ControlSystem};
use sdpsense::ipm::{solve, SolveStatus, SolverConfig};
use sdpsense::mpla::{MpMatrix, MpScalar};
use sdpsense::sdpmodel::BlockMatrix;
use sdpsense::sensitivity::{
    attainment_check, continuity_diagnostic, parse_grid, run_sweep, to_csv, Attainment,
    ContinuityVerdict, SweepOutputs, SweepSpec,
};

const P: u32 = 1024;

fn rank_one_dual_point() -> BlockMatrix {
    let root5 = MpScalar::from_i64(P, 5).sqrt();
    let w = [
        MpScalar::zero(P),
        MpScalar::from_i64(P, -4),
        MpScalar::one(P),
        MpScalar::from_i64(P, -2),
        root5,
        MpScalar::zero(P),
    ];
    let tenth = MpScalar::ratio(P, 1, 10);
    let x1 = MpMatrix::from_fn(P, 6, 6, |i, j| &(&w[i] * &w[j]) * &tenth);
    let mut x2 = MpMatrix::zeros(P, 2, 2);
    x2[(1, 1)] = MpScalar::from_i64(P, 4);
    BlockMatrix::new(vec![x1, x2])
}

#[test]
fn optimum_of_the_hinf_problem_is_not_attained() {
    let prob = expprimal(P);
    let tol = MpScalar::parse(P, "1e-20").unwrap();
    match attainment_check(&prob, &rank_one_dual_point(), &tol).unwrap() {
        Attainment::NotAttained { residual } => assert!(residual.to_f64() > 1e-3),
        a => panic!("{a:?}"),
    }
}

#[test]
fn reduced_problem_attains_its_optimum() {
    let prob = expprimal(P);
    let res = facial_reduction(&prob, &FacialConfig::new(P)).unwrap();
    let red = restrict_to_face(&prob, res.minimal_face());
    let rep = solve(&red, &SolverConfig::reference("1e-50")).unwrap();
    assert_eq!(rep.status, SolveStatus::Optimal);
    let tol = MpScalar::parse(P, "1e-20").unwrap();
    match attainment_check(&red, &rep.solution.x, &tol).unwrap() {
        Attainment::Attained {
            y,
            slack_min_eigenvalue,
            ..
        } => {
            assert!(slack_min_eigenvalue.to_f64() > -1e-20);
            let v = red.primal_objective(&y).to_f64();
            assert!((v + 5f64.sqrt()).abs() < 1e-12);
        }
        a => panic!("{a:?}"),
    }
}

#[test]
fn switching_the_perturbation_on_jumps() {
    let fam = perturbation_family(Perturbation::P1, P);
    let grid = parse_grid("1e-16,1e-12,1e-8,1e-6,1e-4", P).unwrap();
    let spec = SweepSpec::new(fam, grid, SolverConfig::reference("1e-50"))
        .with_outputs(SweepOutputs::values_only());
    let rows = run_sweep(&spec).unwrap();
    let rep = continuity_diagnostic(&rows, &MpScalar::parse(P, "1e-6").unwrap());
    assert_eq!(rep.verdict, ContinuityVerdict::SuspectedJump);
    assert!((rep.max_jump - (5f64.sqrt() - 2f64.sqrt())).abs() < 1e-8);
}

#[test]
fn short_matrixwise_sweeps() {
    let sys = ControlSystem::reference_plant(P);
    let tol = MpScalar::parse(P, "1e-6").unwrap();
    for name in ["a11", "a21"] {
        let fam = matrixwise_family(&sys, name).unwrap();
        let spec = SweepSpec::new(
            fam,
            parse_grid("±k*1e-5:1..2", P).unwrap(),
            SolverConfig::reference("1e-50"),
        );
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.is_optimal()), "{name}");
        let rep = continuity_diagnostic(&rows, &tol);
        assert_eq!(rep.verdict, ContinuityVerdict::Continuous, "{name}");
        let dims: Vec<Vec<usize>> = rows
            .iter()
            .map(|r| r.face_signature.as_ref().unwrap().r.clone())
            .collect();
        for (r, d) in rows.iter().zip(&dims) {
            let expected = if name == "a11" || r.t.is_zero() {
                vec![5, 1]
            } else {
                vec![6, 2]
            };
            assert_eq!(*d, expected, "{name} at {}", r.t.to_f64());
        }
    }
}

#[test]
fn sweeps_replay_identically() {
    let sys = ControlSystem::reference_plant(P);
    let fam = matrixwise_family(&sys, "a21").unwrap();
    let spec = SweepSpec::new(
        fam,
        parse_grid("±k*1e-4:1..1", P).unwrap(),
        SolverConfig::reference("1e-30"),
    )
    .with_seed(5);
    let a = to_csv(&run_sweep(&spec).unwrap());
    let b = to_csv(&run_sweep(&spec).unwrap());
    assert_eq!(a, b);
}
