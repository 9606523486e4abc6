use std::path::Path;

use crate::mpla::MpScalar;

use super::IpmError;

/// Solver parameters, named as in SDPA parameter files.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iteration: usize,
    pub epsilon_star: MpScalar,
    pub epsilon_dash: MpScalar,
    pub lambda_star: MpScalar,
    /// Parsed and stored; the initial point uses `lambda_star` only.
    pub omega_star: MpScalar,
    pub lower_bound: MpScalar,
    pub upper_bound: MpScalar,
    pub beta_star: MpScalar,
    pub beta_bar: MpScalar,
    pub gamma_star: MpScalar,
    pub precision_bits: u32,
}

fn num(prec: u32, s: &str) -> MpScalar {
    MpScalar::parse(prec, s).expect("literal")
}

impl SolverConfig {
    /// The reference parameter set with stopping tolerance `delta` for
    /// both `epsilonStar` and `epsilonDash`.
    pub fn reference(delta: &str) -> Self {
        Self::reference_at(1024, delta)
    }

    pub fn reference_at(prec: u32, delta: &str) -> Self {
        SolverConfig {
            max_iteration: 10000,
            epsilon_star: num(prec, delta),
            epsilon_dash: num(prec, delta),
            lambda_star: num(prec, "1.0e+4"),
            omega_star: num(prec, "2.0"),
            lower_bound: num(prec, "-1.0e+5"),
            upper_bound: num(prec, "1.0e+5"),
            beta_star: num(prec, "0.5"),
            beta_bar: num(prec, "0.5"),
            gamma_star: num(prec, "0.5"),
            precision_bits: prec,
        }
    }

    /// Aggressive settings for well-posed auxiliary problems.
    pub fn fast(prec: u32, delta: &str) -> Self {
        SolverConfig {
            max_iteration: 2000,
            lambda_star: num(prec, "1.0e+2"),
            beta_star: num(prec, "0.1"),
            beta_bar: num(prec, "0.3"),
            gamma_star: num(prec, "0.9"),
            ..Self::reference_at(prec, delta)
        }
    }

    /// Sets `epsilonStar = epsilonDash = delta`.
    pub fn with_epsilon(mut self, delta: &MpScalar) -> Self {
        self.epsilon_star = delta.with_prec(self.precision_bits);
        self.epsilon_dash = delta.with_prec(self.precision_bits);
        self
    }

    /// Changes the working precision, re-rounding all parameters.
    pub fn with_precision(mut self, prec: u32) -> Self {
        self.precision_bits = prec;
        for v in [
            &mut self.epsilon_star,
            &mut self.epsilon_dash,
            &mut self.lambda_star,
            &mut self.omega_star,
            &mut self.lower_bound,
            &mut self.upper_bound,
            &mut self.beta_star,
            &mut self.beta_bar,
            &mut self.gamma_star,
        ] {
            *v = v.with_prec(prec);
        }
        self
    }

    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), IpmError> {
        let p = self.precision_bits;
        let zero = MpScalar::zero(p);
        let one = MpScalar::one(p);
        let bad = |m: &str| Err(IpmError::InvalidConfig(m.to_string()));
        if p < 32 {
            return bad("precision must be at least 32 bits");
        }
        if self.max_iteration == 0 {
            return bad("maxIteration must be positive");
        }
        if !(self.gamma_star > zero && self.gamma_star < one) {
            return bad("gammaStar must lie in (0,1)");
        }
        if !(self.beta_star >= zero && self.beta_star <= self.beta_bar && self.beta_bar < one) {
            return bad("need 0 <= betaStar <= betaBar < 1");
        }
        if !(self.lower_bound < self.upper_bound) {
            return bad("lowerBound must be below upperBound");
        }
        if !(self.epsilon_star > zero && self.epsilon_dash > zero) {
            return bad("stopping tolerances must be positive");
        }
        if !(self.lambda_star > zero) {
            return bad("lambdaStar must be positive");
        }
        Ok(())
    }

    /// Reads `key = value` lines using the SDPA parameter names.
    ///
    /// Unknown keys are rejected. `precision` is applied first so that the
    /// remaining values are parsed at the requested precision.
    pub fn parse_params(text: &str, base: SolverConfig) -> Result<Self, IpmError> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw
                .split('#')
                .next()
                .unwrap_or("")
                .trim()
                .trim_end_matches(';');
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                IpmError::InvalidConfig(format!("line {}: expected key = value", no + 1))
            })?;
            entries.push((no + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = base;
        if let Some((no, _, v)) = entries.iter().find(|(_, k, _)| k == "precision") {
            let p: u32 = v
                .parse()
                .map_err(|_| IpmError::InvalidConfig(format!("line {no}: bad precision")))?;
            cfg = cfg.with_precision(p);
        }
        let prec = cfg.precision_bits;
        for (no, k, v) in &entries {
            let val = || {
                MpScalar::parse(prec, v)
                    .map_err(|_| IpmError::InvalidConfig(format!("line {no}: bad value {v:?}")))
            };
            match k.as_str() {
                "precision" => {}
                "maxIteration" => {
                    cfg.max_iteration = v.parse::<f64>().map_err(|_| {
                        IpmError::InvalidConfig(format!("line {no}: bad maxIteration"))
                    })? as usize
                }
                "epsilonStar" => cfg.epsilon_star = val()?,
                "epsilonDash" => cfg.epsilon_dash = val()?,
                "lambdaStar" => cfg.lambda_star = val()?,
                "omegaStar" => cfg.omega_star = val()?,
                "lowerBound" => cfg.lower_bound = val()?,
                "upperBound" => cfg.upper_bound = val()?,
                "betaStar" => cfg.beta_star = val()?,
                "betaBar" => cfg.beta_bar = val()?,
                "gammaStar" => cfg.gamma_star = val()?,
                other => {
                    return Err(IpmError::InvalidConfig(format!(
                        "line {no}: unknown parameter {other:?}"
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IpmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| IpmError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::parse_params(&text, Self::reference("1.0e-50"))
    }

    /// `key = value` text accepted by [`SolverConfig::parse_params`].
    pub fn to_params(&self) -> String {
        let d = |x: &MpScalar| x.to_decimal(17);
        format!(
            "maxIteration = {}\nepsilonStar = {}\nlambdaStar = {}\nomegaStar = {}\n\
             lowerBound = {}\nupperBound = {}\nbetaStar = {}\nbetaBar = {}\n\
             gammaStar = {}\nepsilonDash = {}\nprecision = {}\n",
            self.max_iteration,
            d(&self.epsilon_star),
            d(&self.lambda_star),
            d(&self.omega_star),
            d(&self.lower_bound),
            d(&self.upper_bound),
            d(&self.beta_star),
            d(&self.beta_bar),
            d(&self.gamma_star),
            d(&self.epsilon_dash),
            self.precision_bits
        )
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::reference("1.0e-50")
    }
}
