use serde::Serialize;

use crate::mpla::MpScalar;

use super::SweepRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ContinuityVerdict {
    Continuous,
    SuspectedJump,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    /// Limit of `|value(t) − value(0)|` as `t → 0`, from a line fitted to
    /// `|Δvalue|` against `|t|` over the smallest-|t| decile.
    pub max_jump: f64,
    /// `max |value(t) − value(0)|` over the same points.
    pub decile_max: f64,
    /// `max |value(t) − value(0)| / |t|` over the same points.
    pub modulus_estimate: f64,
    pub decile_size: usize,
    pub verdict: ContinuityVerdict,
    /// Points on the base face with the rank condition whose change exceeds
    /// twice the slope fitted on the outer half of such points.
    pub lipschitz_flags: Vec<f64>,
}

fn deltas(rows: &[SweepRow], v0: &MpScalar) -> Vec<(MpScalar, MpScalar, usize)> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| !r.t.is_zero() && r.is_optimal())
        .filter_map(|(i, r)| r.value().map(|v| (r.t.abs(), (v - v0).abs(), i)))
        .collect()
}

fn distinct_abscissae(pts: &[(MpScalar, MpScalar, usize)]) -> usize {
    let mut n = 0;
    for (i, p) in pts.iter().enumerate() {
        if i == 0 || p.0 != pts[i - 1].0 {
            n += 1;
        }
    }
    n
}

/// Least-squares intercept of `d` against `t`, clipped at zero; `None`
/// with fewer than two distinct `t`.
fn intercept(pts: &[(MpScalar, MpScalar, usize)]) -> Option<MpScalar> {
    if distinct_abscissae(pts) < 2 {
        return None;
    }
    let prec = pts[0].0.prec();
    let n = MpScalar::from_i64(prec, pts.len() as i64);
    let mut st = MpScalar::zero(prec);
    let mut sd = MpScalar::zero(prec);
    for (t, d, _) in pts {
        st += t;
        sd += d;
    }
    let (mt, md) = (&st / &n, &sd / &n);
    let mut num = MpScalar::zero(prec);
    let mut den = MpScalar::zero(prec);
    for (t, d, _) in pts {
        let dt = t - &mt;
        num.add_mul(&dt, &(d - &md));
        den.add_mul(&dt, &dt);
    }
    let slope = &num / &den;
    Some((&md - &(&slope * &mt)).max(&MpScalar::zero(prec)))
}

/// Jump test at `t = 0` from the optimal rows of a sweep.
///
/// A sweep without an optimal `t = 0` row reports an infinite jump.
pub fn continuity_diagnostic(rows: &[SweepRow], jump_tol: &MpScalar) -> ContinuityReport {
    let v0 = rows
        .iter()
        .find(|r| r.t.is_zero() && r.is_optimal())
        .and_then(|r| r.value());
    let Some(v0) = v0 else {
        log::warn!("continuity diagnostic without an optimal t = 0 row");
        return ContinuityReport {
            max_jump: f64::INFINITY,
            decile_max: f64::INFINITY,
            modulus_estimate: f64::INFINITY,
            decile_size: 0,
            verdict: ContinuityVerdict::SuspectedJump,
            lipschitz_flags: Vec::new(),
        };
    };
    let mut pts = deltas(rows, v0);
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let mut take = pts.len().div_ceil(10);
    while take < pts.len() && distinct_abscissae(&pts[..take]) < 2 {
        take += 1;
    }
    let inner = &pts[..take];
    let mut decile_max = MpScalar::zero(v0.prec());
    let mut modulus = MpScalar::zero(v0.prec());
    for (t, d, _) in inner {
        decile_max = decile_max.max(d);
        modulus = modulus.max(&(d / t));
    }
    let jump = intercept(inner).unwrap_or_else(|| decile_max.clone());
    let verdict = if jump > *jump_tol {
        ContinuityVerdict::SuspectedJump
    } else {
        ContinuityVerdict::Continuous
    };

    let eligible: Vec<&(MpScalar, MpScalar, usize)> = pts
        .iter()
        .filter(|p| {
            rows[p.2].same_face == Some(true) && rows[p.2].rank_condition_holds == Some(true)
        })
        .collect();
    let mut slope = MpScalar::zero(v0.prec());
    for p in &eligible[eligible.len() / 2..] {
        slope = slope.max(&(&p.1 / &p.0));
    }
    let two = MpScalar::from_i64(v0.prec(), 2);
    let slack = jump_tol * &MpScalar::parse(v0.prec(), "1e-3").expect("literal");
    let lipschitz_flags = eligible
        .iter()
        .filter(|p| p.1 > &(&(&two * &slope) * &p.0) + &slack)
        .map(|p| rows[p.2].t.to_f64())
        .collect();

    ContinuityReport {
        max_jump: jump.to_f64(),
        decile_max: decile_max.to_f64(),
        modulus_estimate: modulus.to_f64(),
        decile_size: take,
        verdict,
        lipschitz_flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensitivity::FeasibilityStatus;

    const P: u32 = 128;

    fn row(t: f64, v: f64) -> SweepRow {
        SweepRow {
            t: MpScalar::from_f64(P, t),
            primal_value: Some(MpScalar::from_f64(P, v)),
            dual_value: Some(MpScalar::from_f64(P, v)),
            face_signature: None,
            same_face: Some(true),
            rank_condition_holds: Some(true),
            feasibility_status: FeasibilityStatus::NotChecked,
            solve_iterations: 1,
            status: "Optimal".into(),
        }
    }

    #[test]
    fn on_off_jump_is_reported() {
        let (lo, hi) = (-(5f64.sqrt()), -(2f64.sqrt()));
        let mut rows = vec![row(0.0, lo)];
        rows.extend((1..=20).map(|k| row(k as f64 * 1e-6, hi)));
        let rep = continuity_diagnostic(&rows, &MpScalar::parse(P, "1e-6").unwrap());
        assert_eq!(rep.verdict, ContinuityVerdict::SuspectedJump);
        assert!((rep.max_jump - 0.8218544).abs() < 1e-6);
        assert_eq!(rep.decile_size, 2);
        assert!((rep.decile_max - rep.max_jump).abs() < 1e-12);
    }

    #[test]
    fn linear_change_is_continuous() {
        let rows: Vec<SweepRow> = (-10..=10)
            .map(|k| row(k as f64 * 1e-5, 3.0 + 0.05 * k as f64 * 1e-5))
            .collect();
        let rep = continuity_diagnostic(&rows, &MpScalar::parse(P, "1e-6").unwrap());
        assert_eq!(rep.verdict, ContinuityVerdict::Continuous);
        assert!((rep.modulus_estimate - 0.05).abs() < 1e-9);
        assert!(rep.lipschitz_flags.is_empty());
    }

    #[test]
    fn steep_slope_is_not_a_jump() {
        let mut rows = vec![row(0.0, -2.0)];
        for k in 1..=100 {
            let t = k as f64 * 1e-5;
            rows.push(row(-t, -2.0 + 0.8 * t));
            rows.push(row(t, -2.0 + 0.79 * t));
        }
        let rep = continuity_diagnostic(&rows, &MpScalar::parse(P, "1e-6").unwrap());
        assert_eq!(rep.verdict, ContinuityVerdict::Continuous);
        assert!(rep.decile_max > 1e-6);
        assert!(rep.max_jump < 1e-9);
    }

    #[test]
    fn steep_inner_point_is_flagged() {
        let mut rows: Vec<SweepRow> = (0..=10)
            .map(|k| row(k as f64 * 1e-2, k as f64 * 1e-2))
            .collect();
        rows[1] = row(1e-2, 1e-1);
        let rep = continuity_diagnostic(&rows, &MpScalar::parse(P, "1e-6").unwrap());
        assert_eq!(rep.lipschitz_flags, vec![1e-2]);
    }

    #[test]
    fn missing_origin() {
        let rows = vec![row(1.0, 1.0)];
        let rep = continuity_diagnostic(&rows, &MpScalar::parse(P, "1e-6").unwrap());
        assert_eq!(rep.verdict, ContinuityVerdict::SuspectedJump);
        assert!(rep.max_jump.is_infinite());
    }
}
