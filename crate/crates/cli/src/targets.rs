//! Evaluation of every function the command line can reach, by route.

use std::collections::BTreeMap;
use std::fmt;

use heun_core::closed_forms::{
    eval_family_negative, eval_family_positive, eval_sample_family, sample_family_params,
    FamilyParamsNeg, FamilyParamsPos,
};
use heun_core::coincidence::{
    eval_f, eval_g, eval_k, eval_k_derivative, k_termwise_derivative,
};
use heun_core::hypergeom::{clausen_3f2_unit, eval_hl_hypergeometric, gauss_2f1, gauss_2f1_closed};
use heun_core::series::{eval_confluent_heun, eval_heun_local, transform_homotopy};
use heun_core::{
    Clausen3F2Params, ConfluentHeunParams, Error, EvalResult, FMethod, GMethod, Gauss2F1Params,
    GeneralHeunParams, SeriesOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    #[value(name = "heun")]
    Heun,
    #[value(name = "confluent")]
    Confluent,
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
    #[value(name = "K")]
    K,
    #[value(name = "Kderiv")]
    KDeriv,
    #[value(name = "2f1")]
    Gauss2F1,
    #[value(name = "3f2")]
    Clausen3F2,
    #[value(name = "hl-hyp")]
    HlHyp,
    #[value(name = "family-neg")]
    FamilyNeg,
    #[value(name = "family-pos")]
    FamilyPos,
    #[value(name = "sample-family")]
    SampleFamily,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Heun => "heun",
            Target::Confluent => "confluent",
            Target::F => "F",
            Target::G => "G",
            Target::K => "K",
            Target::KDeriv => "Kderiv",
            Target::Gauss2F1 => "2f1",
            Target::Clausen3F2 => "3f2",
            Target::HlHyp => "hl-hyp",
            Target::FamilyNeg => "family-neg",
            Target::FamilyPos => "family-pos",
            Target::SampleFamily => "sample-family",
        }
    }

    /// Every route, default first.
    pub fn routes(self) -> Vec<&'static str> {
        match self {
            Target::Heun => vec!["series", "homotopy"],
            Target::Confluent => vec!["series"],
            Target::F => {
                let mut v = vec!["established"];
                v.extend(FMethod::ALL.iter().map(|m| m.name()).filter(|m| *m != "established"));
                v.push("heun");
                v
            }
            Target::G => {
                let mut v = vec!["established"];
                v.extend(GMethod::ALL.iter().map(|m| m.name()).filter(|m| *m != "established"));
                v.push("heun");
                v
            }
            Target::K => vec!["definitional", "confluent", "integral"],
            Target::KDeriv => vec!["integral", "termwise"],
            Target::Gauss2F1 => vec!["series", "closed"],
            Target::Clausen3F2 => vec!["levin"],
            Target::HlHyp => vec!["hypergeometric", "series"],
            Target::FamilyNeg | Target::FamilyPos | Target::SampleFamily => vec!["closed", "series"],
        }
    }

    /// Whether the target takes an evaluation point.
    pub fn takes_x(self) -> bool {
        self != Target::Clausen3F2
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Failure while evaluating a target.
#[derive(Debug)]
pub enum EvalError {
    /// Bad or missing arguments.
    Usage(String),
    /// The numerics failed or did not converge.
    Numerical(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Usage(m) | EvalError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<Error> for EvalError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::UnknownRelation(_) => EvalError::Usage(e.to_string()),
            _ => EvalError::Numerical(e.to_string()),
        }
    }
}

/// A target with its parameters, ready to evaluate at any point.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    pub target: Target,
    pub n: Option<u32>,
    pub j: Option<u32>,
    pub params: BTreeMap<String, f64>,
    pub opts: SeriesOptions,
}

/// A value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Value {
    pub value: f64,
    pub error_estimate: f64,
}

impl Value {
    fn exact(value: f64) -> Self {
        Value {
            value,
            error_estimate: 0.0,
        }
    }
}

fn from_result(r: EvalResult) -> Result<Value, EvalError> {
    if !r.converged {
        return Err(EvalError::Numerical(format!(
            "series did not converge within {} terms (last error estimate {:e})",
            r.terms_used, r.error_estimate
        )));
    }
    Ok(Value {
        value: r.value,
        error_estimate: r.error_estimate,
    })
}

impl TargetSpec {
    fn n(&self) -> Result<u32, EvalError> {
        self.n
            .ok_or_else(|| EvalError::Usage(format!("target {} needs --n", self.target)))
    }

    fn j(&self) -> Result<u32, EvalError> {
        self.j
            .ok_or_else(|| EvalError::Usage(format!("target {} needs --j", self.target)))
    }

    fn param(&self, key: &str) -> Result<f64, EvalError> {
        self.params.get(key).copied().ok_or_else(|| {
            EvalError::Usage(format!("target {} needs --param {key}=<value>", self.target))
        })
    }

    fn integer_param(&self, key: &str) -> Result<u32, EvalError> {
        let v = self.param(key)?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(EvalError::Usage(format!("{key} must be a nonnegative integer, got {v}")));
        }
        Ok(v as u32)
    }

    fn heun_params(&self) -> Result<GeneralHeunParams, EvalError> {
        Ok(GeneralHeunParams::new(
            self.param("a")?,
            self.param("q")?,
            self.param("alpha")?,
            self.param("beta")?,
            self.param("gamma")?,
            self.param("delta")?,
        )?)
    }

    fn local(&self, p: [f64; 6], x: f64) -> Result<Value, EvalError> {
        let params = GeneralHeunParams::new(p[0], p[1], p[2], p[3], p[4], p[5])?;
        from_result(eval_heun_local(&params, x, &self.opts)?)
    }

    /// Checks that `route` belongs to the target, returning the default
    /// when none is given.
    pub fn resolve_route(&self, route: Option<&str>) -> Result<&'static str, EvalError> {
        let routes = self.target.routes();
        match route {
            None => Ok(routes[0]),
            Some(r) => routes.iter().copied().find(|m| *m == r).ok_or_else(|| {
                EvalError::Usage(format!(
                    "unknown method `{r}` for target {}; expected one of {}",
                    self.target,
                    routes.join(", ")
                ))
            }),
        }
    }

    /// Evaluates the target at `x` by `route`.
    pub fn evaluate(&self, route: &str, x: f64) -> Result<Value, EvalError> {
        let route = self.resolve_route(Some(route))?;
        let opts = &self.opts;
        match self.target {
            Target::Heun => {
                let p = self.heun_params()?;
                if route == "homotopy" {
                    let (e, t) = transform_homotopy(&p);
                    let inner = from_result(eval_heun_local(&t, x, opts)?)?;
                    let scale = (1.0 - x / p.a()).powf(e);
                    Ok(Value {
                        value: scale * inner.value,
                        error_estimate: scale.abs() * inner.error_estimate,
                    })
                } else {
                    from_result(eval_heun_local(&p, x, opts)?)
                }
            }
            Target::Confluent => {
                let p = ConfluentHeunParams::new(
                    self.param("p")?,
                    self.param("gamma")?,
                    self.param("delta")?,
                    self.param("alpha")?,
                    self.param("sigma")?,
                )?;
                from_result(eval_confluent_heun(&p, x, opts)?)
            }
            Target::F => {
                let n = self.n()?;
                if route == "heun" {
                    let nf = n as f64;
                    return self.local([0.5, -nf, -2.0 * nf, 1.0, 1.0, 1.0], x);
                }
                let m: FMethod = route.parse()?;
                Ok(Value::exact(eval_f(n, x, m)?))
            }
            Target::G => {
                let n = self.n()?;
                if route == "heun" {
                    let nf = n as f64;
                    return self.local([0.5, nf, 2.0 * nf, 1.0, 1.0, 1.0], -x);
                }
                let m: GMethod = route.parse()?;
                from_result(eval_g(n, x, m, opts)?)
            }
            Target::K => {
                let n = self.n()?;
                match route {
                    "confluent" => {
                        let nf = n as f64;
                        let p = ConfluentHeunParams::new(nf, 1.0, 0.0, 0.5, 2.0 * nf)?;
                        from_result(eval_confluent_heun(&p, x, opts)?)
                    }
                    "integral" => from_result(eval_k_derivative(n, 0, x)?),
                    _ => from_result(eval_k(n, x, opts)?),
                }
            }
            Target::KDeriv => {
                let (n, j) = (self.n()?, self.j()?);
                if route == "termwise" {
                    Ok(Value::exact(k_termwise_derivative(n, j, x)?))
                } else {
                    from_result(eval_k_derivative(n, j, x)?)
                }
            }
            Target::Gauss2F1 => {
                let p = Gauss2F1Params::new(self.param("a")?, self.param("b")?, self.param("c")?)?;
                if route == "closed" {
                    let (a, b, c) = (p.a(), p.b(), p.c());
                    let k2 = c - a - 1.0;
                    if a < 1.0 || a.fract() != 0.0 || b != 1.0 || k2 < 0.0 || k2 % 2.0 != 0.0 {
                        return Err(EvalError::Usage(
                            "closed route needs a = m >= 1, b = 1, c = m + 2k + 1 with integers m, k".into(),
                        ));
                    }
                    Ok(Value::exact(gauss_2f1_closed(a as u32, (k2 / 2.0) as u32, x)?))
                } else {
                    from_result(gauss_2f1(&p, x, opts)?)
                }
            }
            Target::Clausen3F2 => {
                let p = Clausen3F2Params::new(
                    self.param("a1")?,
                    self.param("a2")?,
                    self.param("a3")?,
                    self.param("b1")?,
                    self.param("b2")?,
                )?;
                from_result(clausen_3f2_unit(&p, opts)?)
            }
            Target::HlHyp => {
                let q = self.param("q")?;
                if route == "series" {
                    self.local([0.5, q, 2.0 * q, 1.0, 1.0, 1.0], x)
                } else {
                    from_result(eval_hl_hypergeometric(q, x, opts)?)
                }
            }
            Target::FamilyNeg => {
                let fp = FamilyParamsNeg::new(self.n()?, self.param("theta")?, self.param("gamma")?)?;
                if route == "series" {
                    self.local(fp.heun_params(), x)
                } else {
                    Ok(Value::exact(eval_family_negative(&fp, x)))
                }
            }
            Target::FamilyPos => {
                let fp =
                    FamilyParamsPos::new(self.n()?, self.param("theta")?, self.integer_param("gamma")?)?;
                if route == "series" {
                    self.local(fp.heun_params(), x)
                } else {
                    Ok(Value::exact(eval_family_positive(&fp, x)?))
                }
            }
            Target::SampleFamily => {
                let (n, i) = (self.n()?, self.integer_param("i")?);
                if route == "series" {
                    if i > n {
                        return Err(EvalError::Usage(format!("need i <= n, got i = {i}, n = {n}")));
                    }
                    self.local(sample_family_params(n, i), x)
                } else {
                    Ok(Value::exact(eval_sample_family(n, i, x)?))
                }
            }
        }
    }
}
