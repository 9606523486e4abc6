//! Minimal complex arithmetic over [`MpScalar`] for rank tests in `λ`.

use crate::mpla::MpScalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Cx {
    pub re: MpScalar,
    pub im: MpScalar,
}

impl Cx {
    pub fn new(re: MpScalar, im: MpScalar) -> Self {
        Cx { re, im }
    }

    pub fn real(re: MpScalar) -> Self {
        let im = MpScalar::zero(re.prec());
        Cx { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Cx::real(MpScalar::zero(prec))
    }

    pub fn add(&self, o: &Cx) -> Cx {
        Cx::new(&self.re + &o.re, &self.im + &o.im)
    }

    pub fn sub(&self, o: &Cx) -> Cx {
        Cx::new(&self.re - &o.re, &self.im - &o.im)
    }

    pub fn mul(&self, o: &Cx) -> Cx {
        Cx::new(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
        )
    }

    pub fn div(&self, o: &Cx) -> Cx {
        let d = &o.re.square() + &o.im.square();
        Cx::new(
            &(&(&self.re * &o.re) + &(&self.im * &o.im)) / &d,
            &(&(&self.im * &o.re) - &(&self.re * &o.im)) / &d,
        )
    }

    pub fn abs(&self) -> MpScalar {
        (&self.re.square() + &self.im.square()).sqrt()
    }

    pub fn sqrt(&self) -> Cx {
        let prec = self.re.prec();
        let two = MpScalar::from_i64(prec, 2);
        let r = self.abs();
        let a = (&(&r + &self.re) / &two).sqrt();
        let mut b = (&(&r - &self.re) / &two).sqrt();
        if self.im.is_sign_negative() {
            b = -&b;
        }
        Cx::new(a, b)
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut m: Vec<Vec<Cx>>) -> Cx {
    let n = m.len();
    if n == 0 {
        return Cx::real(MpScalar::from_i64(64, 1));
    }
    let prec = m[0][0].re.prec();
    let mut acc = Cx::real(MpScalar::one(prec));
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| {
                m[a][c]
                    .abs()
                    .partial_cmp(&m[b][c].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[piv][c].abs().is_zero() {
            return Cx::zero(prec);
        }
        if piv != c {
            m.swap(piv, c);
            acc = Cx::new(-&acc.re, -&acc.im);
        }
        acc = acc.mul(&m[c][c]);
        for r in (c + 1)..n {
            let f = m[r][c].div(&m[c][c]);
            for k in c..n {
                let t = f.mul(&m[c][k]);
                m[r][k] = m[r][k].sub(&t);
            }
        }
    }
    acc
}

/// Evaluates `Σ coeffs[i] λ^i`.
pub fn horner(coeffs: &[MpScalar], z: &Cx) -> Cx {
    let prec = z.re.prec();
    let mut acc = Cx::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(&Cx::real(c.clone()));
    }
    acc
}

/// All complex roots of `Σ coeffs[i] λ^i` (trailing zero coefficients are
/// dropped). Closed forms up to degree two, Durand–Kerner above.
pub fn poly_roots(coeffs: &[MpScalar]) -> Vec<Cx> {
    let mut c: Vec<MpScalar> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let prec = c[0].prec();
    let deg = c.len() - 1;
    let lead = c[deg].clone();
    let monic: Vec<MpScalar> = c.iter().map(|x| x / &lead).collect();
    match deg {
        1 => vec![Cx::real(-&monic[0])],
        2 => {
            let half_b = &monic[1] / &MpScalar::from_i64(prec, 2);
            let disc = Cx::real(&half_b.square() - &monic[0]).sqrt();
            let mid = Cx::real(-&half_b);
            vec![mid.add(&disc), mid.sub(&disc)]
        }
        _ => durand_kerner(&monic, prec),
    }
}

fn durand_kerner(monic: &[MpScalar], prec: u32) -> Vec<Cx> {
    let deg = monic.len() - 1;
    let seed = Cx::new(MpScalar::ratio(prec, 2, 5), MpScalar::ratio(prec, 9, 10));
    let mut z: Vec<Cx> = Vec::with_capacity(deg);
    let mut p = Cx::real(MpScalar::one(prec));
    for _ in 0..deg {
        p = p.mul(&seed);
        z.push(p.clone());
    }
    let tol = MpScalar::pow2(prec, -(prec as i32) + 16);
    for _ in 0..(4 * prec as usize) {
        let mut change = MpScalar::zero(prec);
        for i in 0..deg {
            let mut den = Cx::real(MpScalar::one(prec));
            for j in 0..deg {
                if i != j {
                    den = den.mul(&z[i].sub(&z[j]));
                }
            }
            if den.abs().is_zero() {
                continue;
            }
            let step = horner(monic, &z[i]).div(&den);
            change = change.max(&step.abs());
            z[i] = z[i].sub(&step);
        }
        if change <= tol {
            break;
        }
    }
    z
}
