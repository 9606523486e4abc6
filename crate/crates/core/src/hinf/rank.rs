use crate::mpla::{default_cert_tol, MpScalar};

use super::complex::{det, poly_roots, Cx};
use super::ControlSystem;

#[derive(Clone, Debug, PartialEq)]
pub enum FeasibilityVerdict {
    /// The stacked matrix loses column rank at `witness` with `Re ≤ 0`, so
    /// the dual has no strictly feasible point.
    NotStrict {
        witness: Cx,
    },
    Strict,
}

/// Rectangle `Re ∈ [−10, 0]`, `Im ∈ [−10, 10]` sampled every 0.25.
pub fn default_grid(prec: u32) -> Vec<Cx> {
    let mut out = Vec::new();
    for r in 0..=40 {
        for i in -40..=40 {
            out.push(Cx::new(
                MpScalar::ratio(prec, -r, 4),
                MpScalar::ratio(prec, i, 4),
            ));
        }
    }
    out
}

fn real(m: &crate::mpla::MpMatrix, i: usize, j: usize) -> Cx {
    Cx::real(m[(i, j)].clone())
}

/// `[A − λI, B₂]`, `n_x × (n_x + n_u)`.
fn control_pencil(sys: &ControlSystem, lambda: &Cx) -> Vec<Vec<Cx>> {
    let (nx, _, nu, _) = sys.dims();
    (0..nx)
        .map(|i| {
            let mut row: Vec<Cx> = (0..nx).map(|j| real(&sys.a, i, j)).collect();
            row[i] = row[i].sub(lambda);
            row.extend((0..nu).map(|j| real(&sys.b2, i, j)));
            row
        })
        .collect()
}

/// `[A − λI, B₂; C₁, D₁₂]`, `(n_x + n_z) × (n_x + n_u)`.
fn stacked_pencil(sys: &ControlSystem, lambda: &Cx) -> Vec<Vec<Cx>> {
    let (nx, _, nu, nz) = sys.dims();
    let mut rows = control_pencil(sys, lambda);
    for i in 0..nz {
        let mut row: Vec<Cx> = (0..nx).map(|j| real(&sys.c1, i, j)).collect();
        row.extend((0..nu).map(|j| real(&sys.d12, i, j)));
        rows.push(row);
    }
    rows
}

fn transpose(m: &[Vec<Cx>]) -> Vec<Vec<Cx>> {
    let c = m.first().map_or(0, |r| r.len());
    (0..c)
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// True when the tall matrix `m` has column rank below its width: every
/// maximal minor vanishes relative to Hadamard's bound.
fn column_rank_deficient(m: &[Vec<Cx>], tol: &MpScalar) -> bool {
    let q = m.first().map_or(0, |r| r.len());
    if m.len() < q {
        return true;
    }
    subsets(m.len(), q).iter().all(|rows| {
        let sub: Vec<Vec<Cx>> = rows.iter().map(|&i| m[i].clone()).collect();
        let mut bound = MpScalar::one(tol.prec());
        for r in &sub {
            let mut s = MpScalar::zero(tol.prec());
            for x in r {
                s += x.abs().square();
            }
            bound = &bound * &s.sqrt();
        }
        det(sub).abs() <= tol * &bound
    })
}

/// Coefficients of the degree-`deg` polynomial `λ ↦ f(λ)` from its values at
/// `λ = 0..deg` (Newton divided differences).
fn interpolate(deg: usize, prec: u32, f: impl Fn(&Cx) -> Cx) -> Vec<MpScalar> {
    let nodes: Vec<MpScalar> = (0..=deg)
        .map(|i| MpScalar::from_i64(prec, i as i64))
        .collect();
    let mut dd: Vec<MpScalar> = nodes.iter().map(|x| f(&Cx::real(x.clone())).re).collect();
    for level in 1..=deg {
        for i in (level..=deg).rev() {
            dd[i] = &(&dd[i] - &dd[i - 1]) / &(&nodes[i] - &nodes[i - level]);
        }
    }
    let mut poly = vec![dd[deg].clone()];
    for k in (0..deg).rev() {
        // poly ← poly·(λ − x_k) + dd[k]
        let mut next = vec![MpScalar::zero(prec); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c.clone();
            next[i].sub_mul(c, &nodes[k]);
        }
        next[0] += dd[k].clone();
        poly = next;
    }
    poly
}

fn eigenvalues_of_a(sys: &ControlSystem) -> Vec<Cx> {
    let (nx, ..) = sys.dims();
    let prec = sys.prec();
    let charpoly = interpolate(nx, prec, |l| {
        let m: Vec<Vec<Cx>> = control_pencil(sys, l)
            .into_iter()
            .map(|r| r[..nx].to_vec())
            .collect();
        det(m)
    });
    poly_roots(&charpoly)
}

fn poly_scale(p: &[MpScalar]) -> MpScalar {
    let mut s = MpScalar::zero(p.first().map_or(64, |x| x.prec()));
    for c in p {
        s = s.max(&c.abs());
    }
    s
}

/// Candidate rank-drop points: common roots of the maximal minors.
/// Returns `None` when every minor vanishes identically.
fn minor_roots(sys: &ControlSystem, tol: &MpScalar) -> Option<Vec<Cx>> {
    let (nx, _, nu, nz) = sys.dims();
    let prec = sys.prec();
    let q = nx + nu;
    if nx + nz < q {
        return None;
    }
    let polys: Vec<Vec<MpScalar>> = subsets(nx + nz, q)
        .into_iter()
        .map(|rows| {
            interpolate(nx, prec, |l| {
                let m = stacked_pencil(sys, l);
                det(rows.iter().map(|&i| m[i].clone()).collect())
            })
        })
        .collect();
    let scale = polys
        .iter()
        .map(|p| poly_scale(p))
        .fold(MpScalar::zero(prec), |a, b| a.max(&b));
    if scale.is_zero() {
        return None;
    }
    let cut = tol * &scale;
    let trimmed: Vec<Vec<MpScalar>> = polys
        .iter()
        .map(|p| {
            let mut p = p.clone();
            while p.last().is_some_and(|c| c.abs() <= cut) {
                p.pop();
            }
            p
        })
        .collect();
    if trimmed.iter().all(|p| p.is_empty()) {
        return None;
    }
    let pivot = trimmed
        .iter()
        .filter(|p| !p.is_empty())
        .min_by_key(|p| p.len())
        .expect("nonempty");
    Some(poly_roots(pivot))
}

/// `rank [A − λI, B₂] = n_x` at every tested `λ` with `Re λ < 0`.
///
/// The rank can only drop at eigenvalues of `A`; those are always tested,
/// together with the grid points in the open left half-plane.
pub fn stabilizability_check(sys: &ControlSystem, grid: &[Cx]) -> bool {
    let tol = default_cert_tol(sys.prec());
    let zero = MpScalar::zero(sys.prec());
    eigenvalues_of_a(sys)
        .iter()
        .chain(grid)
        .filter(|l| l.re < zero)
        .all(|l| !column_rank_deficient(&transpose(&control_pencil(sys, l)), &tol))
}

/// Decides whether `rank [A − λI, B₂; C₁, D₁₂] < n_x + n_u` for some
/// `Re λ ≤ 0`.
///
/// Candidates are the roots of the maximal minors, the eigenvalues of `A`
/// and the supplied grid; each is confirmed by the full rank test.
pub fn nonstrict_feasibility_criterion(sys: &ControlSystem, grid: &[Cx]) -> FeasibilityVerdict {
    let prec = sys.prec();
    let tol = default_cert_tol(prec);
    let mut candidates = match minor_roots(sys, &tol) {
        None => {
            return FeasibilityVerdict::NotStrict {
                witness: Cx::zero(prec),
            }
        }
        Some(r) => r,
    };
    candidates.extend(eigenvalues_of_a(sys));
    candidates.extend(grid.iter().cloned());
    for l in candidates {
        if l.re > tol {
            continue;
        }
        if column_rank_deficient(&stacked_pencil(sys, &l), &tol) {
            return FeasibilityVerdict::NotStrict { witness: l };
        }
    }
    FeasibilityVerdict::Strict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hinf::PlantParam;
    use crate::mpla::MpMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 512;

    #[test]
    fn example_plant_is_stabilizable() {
        let s = ControlSystem::reference_plant(P);
        assert!(stabilizability_check(&s, &default_grid(P)));
    }

    #[test]
    fn degenerate_plants() {
        let mut s = ControlSystem::reference_plant(P);
        s.b2 = MpMatrix::zeros(P, 2, 1);
        s.a = MpMatrix::identity(P, 2);
        assert!(stabilizability_check(&s, &[]));
        s.a = MpMatrix::identity(P, 2).neg();
        assert!(!stabilizability_check(&s, &[]));
    }

    #[test]
    fn example_plant_witness() {
        let s = ControlSystem::reference_plant(P);
        match nonstrict_feasibility_criterion(&s, &[]) {
            FeasibilityVerdict::NotStrict { witness } => {
                assert!((witness.re.to_f64() + 1.0).abs() < 1e-60);
                assert!(witness.im.to_f64().abs() < 1e-60);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn moved_a11_shifts_the_witness() {
        let s = ControlSystem::reference_plant(P);
        let eps = MpScalar::parse(P, "1e-16").unwrap();
        let p = PlantParam::parse("a11", &s).unwrap();
        match nonstrict_feasibility_criterion(&s.perturbed(p, &eps), &[]) {
            FeasibilityVerdict::NotStrict { witness } => {
                let expected = &MpScalar::from_i64(P, -1) + &eps;
                assert!((&witness.re - &expected).abs().to_f64() < 1e-60);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn random_plant_is_strict() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r = |rows, cols| {
            MpMatrix::from_fn(P, rows, cols, |_, _| {
                MpScalar::from_f64(P, rng.gen_range(-1.0..1.0))
            })
        };
        let s = ControlSystem::new(r(2, 2), r(2, 2), r(2, 1), r(2, 2), r(2, 2), r(2, 1)).unwrap();
        assert_eq!(
            nonstrict_feasibility_criterion(&s, &default_grid(P)[..200]),
            FeasibilityVerdict::Strict
        );
    }
}
