use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::mpla::{MpMatrix, MpScalar};

use super::HinfError;

/// Continuous-time plant `ẋ = Ax + B₁w + B₂u`, `z = C₁x + D₁₁w + D₁₂u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSystem {
    pub a: MpMatrix,
    pub b1: MpMatrix,
    pub b2: MpMatrix,
    pub c1: MpMatrix,
    pub d11: MpMatrix,
    pub d12: MpMatrix,
}

/// A scalar entry of `A`, `B₂`, `C₁` or `D₁₂` (0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlantParam {
    A(usize, usize),
    B2(usize, usize),
    C1(usize, usize),
    D12(usize, usize),
}

impl PlantParam {
    /// The twelve entries of a 2-state, single-input plant.
    pub fn table_order() -> [&'static str; 12] {
        [
            "a11", "a12", "a21", "a22", "b1", "b2", "c11", "c12", "c21", "c22", "d1", "d2",
        ]
    }

    /// `aij`, `cij` address `A`, `C₁`; `bi`, `di` address the first column
    /// of `B₂`, `D₁₂`; `bij`, `dij` address general entries. 1-based.
    pub fn parse(name: &str, sys: &ControlSystem) -> Result<Self, HinfError> {
        let unknown = || HinfError::UnknownParam(name.to_string());
        let mut chars = name.chars();
        let head = chars.next().ok_or_else(unknown)?;
        let digits: Vec<usize> = chars
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<_>>()
            .ok_or_else(unknown)?;
        let (i, j) = match (head, digits.as_slice()) {
            ('a' | 'c', [i, j]) => (*i, *j),
            ('b' | 'd', [i]) => (*i, 1),
            ('b' | 'd', [i, j]) => (*i, *j),
            _ => return Err(unknown()),
        };
        if i == 0 || j == 0 {
            return Err(unknown());
        }
        let p = match head {
            'a' => PlantParam::A(i - 1, j - 1),
            'b' => PlantParam::B2(i - 1, j - 1),
            'c' => PlantParam::C1(i - 1, j - 1),
            _ => PlantParam::D12(i - 1, j - 1),
        };
        let m = sys.param_matrix(p);
        if i > m.rows() || j > m.cols() {
            return Err(unknown());
        }
        Ok(p)
    }

    pub fn name(&self) -> String {
        match *self {
            PlantParam::A(i, j) => format!("a{}{}", i + 1, j + 1),
            PlantParam::C1(i, j) => format!("c{}{}", i + 1, j + 1),
            PlantParam::B2(i, 0) => format!("b{}", i + 1),
            PlantParam::B2(i, j) => format!("b{}{}", i + 1, j + 1),
            PlantParam::D12(i, 0) => format!("d{}", i + 1),
            PlantParam::D12(i, j) => format!("d{}{}", i + 1, j + 1),
        }
    }

    fn index(&self) -> (usize, usize) {
        match *self {
            PlantParam::A(i, j)
            | PlantParam::B2(i, j)
            | PlantParam::C1(i, j)
            | PlantParam::D12(i, j) => (i, j),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PlantFile {
    #[serde(rename = "A")]
    a: Vec<Vec<Value>>,
    #[serde(rename = "B1")]
    b1: Vec<Vec<Value>>,
    #[serde(rename = "B2")]
    b2: Vec<Vec<Value>>,
    #[serde(rename = "C1")]
    c1: Vec<Vec<Value>>,
    #[serde(rename = "D11")]
    d11: Vec<Vec<Value>>,
    #[serde(rename = "D12")]
    d12: Vec<Vec<Value>>,
}

fn matrix_from_json(prec: u32, name: &str, rows: &[Vec<Value>]) -> Result<MpMatrix, HinfError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    let mut out = MpMatrix::zeros(prec, r, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(HinfError::Input(format!("{name}: ragged rows")));
        }
        for (j, v) in row.iter().enumerate() {
            let text = match v {
                Value::Number(n) => n.to_string(),
                Value::String(s) => s.clone(),
                _ => {
                    return Err(HinfError::Input(format!(
                        "{name}: entry ({i},{j}) is not a number"
                    )))
                }
            };
            out[(i, j)] = MpScalar::parse(prec, &text)
                .map_err(|_| HinfError::Input(format!("{name}: bad number {text:?}")))?;
        }
    }
    Ok(out)
}

fn matrix_to_json(m: &MpMatrix) -> Vec<Vec<Value>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| {
                    let x = &m[(i, j)];
                    let f = x.to_f64();
                    if f.fract() == 0.0 && MpScalar::from_f64(x.prec(), f) == *x && f.abs() < 1e15 {
                        Value::from(f as i64)
                    } else {
                        Value::from(x.to_decimal_full())
                    }
                })
                .collect()
        })
        .collect()
}

impl ControlSystem {
    pub fn new(
        a: MpMatrix,
        b1: MpMatrix,
        b2: MpMatrix,
        c1: MpMatrix,
        d11: MpMatrix,
        d12: MpMatrix,
    ) -> Result<Self, HinfError> {
        let sys = ControlSystem {
            a,
            b1,
            b2,
            c1,
            d11,
            d12,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// The two-state example plant used throughout the test suite.
    pub fn reference_plant(prec: u32) -> Self {
        ControlSystem {
            a: MpMatrix::from_i64_rows(prec, &[&[-1, -1], &[1, 0]]),
            b1: MpMatrix::from_i64_rows(prec, &[&[-1, -1], &[-1, 0]]),
            b2: MpMatrix::from_i64_rows(prec, &[&[0], &[1]]),
            c1: MpMatrix::from_i64_rows(prec, &[&[2, -1], &[-1, 2]]),
            d11: MpMatrix::from_i64_rows(prec, &[&[-1, 0], &[-1, 0]]),
            d12: MpMatrix::from_i64_rows(prec, &[&[2], &[-1]]),
        }
    }

    /// `(n_x, n_w, n_u, n_z)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.a.rows(),
            self.b1.cols(),
            self.b2.cols(),
            self.c1.rows(),
        )
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        ControlSystem {
            a: self.a.with_prec(prec),
            b1: self.b1.with_prec(prec),
            b2: self.b2.with_prec(prec),
            c1: self.c1.with_prec(prec),
            d11: self.d11.with_prec(prec),
            d12: self.d12.with_prec(prec),
        }
    }

    pub fn validate(&self) -> Result<(), HinfError> {
        let (nx, nw, nu, nz) = self.dims();
        let checks = [
            ("A", self.a.shape(), (nx, nx)),
            ("B1", self.b1.shape(), (nx, nw)),
            ("B2", self.b2.shape(), (nx, nu)),
            ("C1", self.c1.shape(), (nz, nx)),
            ("D11", self.d11.shape(), (nz, nw)),
            ("D12", self.d12.shape(), (nz, nu)),
        ];
        for (name, found, expected) in checks {
            if found != expected {
                return Err(HinfError::DimensionMismatch(format!(
                    "{name} is {}×{}, expected {}×{}",
                    found.0, found.1, expected.0, expected.1
                )));
            }
        }
        if nx == 0 {
            return Err(HinfError::DimensionMismatch("empty state".into()));
        }
        Ok(())
    }

    fn param_matrix(&self, p: PlantParam) -> &MpMatrix {
        match p {
            PlantParam::A(..) => &self.a,
            PlantParam::B2(..) => &self.b2,
            PlantParam::C1(..) => &self.c1,
            PlantParam::D12(..) => &self.d12,
        }
    }

    pub fn param_value(&self, p: PlantParam) -> MpScalar {
        self.param_matrix(p)[p.index()].clone()
    }

    /// Copy with the entry `p` moved by `t`.
    pub fn perturbed(&self, p: PlantParam, t: &MpScalar) -> Self {
        let mut s = self.clone();
        let m = match p {
            PlantParam::A(..) => &mut s.a,
            PlantParam::B2(..) => &mut s.b2,
            PlantParam::C1(..) => &mut s.c1,
            PlantParam::D12(..) => &mut s.d12,
        };
        m[p.index()] += t.clone();
        s
    }

    /// JSON object with keys `A, B1, B2, C1, D11, D12`; entries are numbers
    /// or decimal strings.
    pub fn from_json(text: &str, prec: u32) -> Result<Self, HinfError> {
        let f: PlantFile =
            serde_json::from_str(text).map_err(|e| HinfError::Input(e.to_string()))?;
        ControlSystem::new(
            matrix_from_json(prec, "A", &f.a)?,
            matrix_from_json(prec, "B1", &f.b1)?,
            matrix_from_json(prec, "B2", &f.b2)?,
            matrix_from_json(prec, "C1", &f.c1)?,
            matrix_from_json(prec, "D11", &f.d11)?,
            matrix_from_json(prec, "D12", &f.d12)?,
        )
    }

    pub fn to_json(&self) -> String {
        let f = PlantFile {
            a: matrix_to_json(&self.a),
            b1: matrix_to_json(&self.b1),
            b2: matrix_to_json(&self.b2),
            c1: matrix_to_json(&self.c1),
            d11: matrix_to_json(&self.d11),
            d12: matrix_to_json(&self.d12),
        };
        serde_json::to_string_pretty(&f).expect("plant serializes")
    }

    pub fn load(path: impl AsRef<Path>, prec: u32) -> Result<Self, HinfError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HinfError::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let s = ControlSystem::reference_plant(256);
        let back = ControlSystem::from_json(&s.to_json(), 256).unwrap();
        assert_eq!(back, s);
        let mut odd = s.clone();
        odd.a[(0, 0)] = MpScalar::ratio(256, 1, 3);
        assert_eq!(ControlSystem::from_json(&odd.to_json(), 256).unwrap(), odd);
    }

    #[test]
    fn dimension_errors() {
        let s = ControlSystem::reference_plant(64);
        let bad = ControlSystem::new(
            s.a.clone(),
            s.b1.clone(),
            MpMatrix::zeros(64, 3, 1),
            s.c1.clone(),
            s.d11.clone(),
            s.d12.clone(),
        );
        assert!(matches!(bad, Err(HinfError::DimensionMismatch(_))));
    }

    #[test]
    fn parameter_names() {
        let s = ControlSystem::reference_plant(64);
        for n in PlantParam::table_order() {
            assert_eq!(PlantParam::parse(n, &s).unwrap().name(), n);
        }
        assert!(PlantParam::parse("a31", &s).is_err());
        assert!(PlantParam::parse("b12", &s).is_err());
        assert!(PlantParam::parse("x", &s).is_err());
    }
}
