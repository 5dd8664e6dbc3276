//! Norms of stored fields: `Ĥ^r_s` for spatial fields, `X^{r,±}_{s,b}` and
//! the sup-in-time data norm for space-time fields.

use std::path::PathBuf;

use qwlab::io::Stored;
use qwlab::spaces::{check_lebesgue, sobolev_hat_norm, sup_time_norm, xsb_norm, NormParams, Sign};
use qwlab::{forward_transform, Repr};
use serde::{Deserialize, Serialize};

use super::{ensure, Command};
use crate::config::Common;
use crate::error::CliError;
use crate::outcome::{num, Outcome};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsCmd {
    pub fields: Vec<PathBuf>,
    pub r: f64,
    pub s: f64,
    pub b: f64,
    /// Sup-in-time norms are taken over `|t| ≤ radius`; 0 uses the whole box.
    pub radius: f64,
    #[serde(skip)]
    loaded: Vec<Stored>,
}

impl Default for NormsCmd {
    fn default() -> Self {
        Self {
            fields: Vec::new(),
            r: 2.0,
            s: 1.0,
            b: 0.55,
            radius: 0.0,
            loaded: Vec::new(),
        }
    }
}

impl Command for NormsCmd {
    fn columns() -> &'static [&'static str] {
        &["field", "kind", "repr", "norm", "sign", "value"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.fields.is_empty(), || {
            "fields must list at least one container".into()
        })?;
        check_lebesgue(self.r)?;
        ensure(self.s.is_finite() && self.b.is_finite() && self.radius >= 0.0, || {
            "s, b must be finite and radius nonnegative".into()
        })?;
        NormParams::new(self.r, self.s, self.b, Sign::Plus)?;
        self.loaded = self
            .fields
            .iter()
            .map(|p| qwlab::io::read(p).map_err(|e| CliError::config(format!("{}: {e}", p.display()))))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let mut all_finite = true;
        for (path, f) in self.fields.iter().zip(&self.loaded) {
            let name = path.display().to_string();
            let mut row = |kind: &str, repr: Repr, norm: &str, sign: &str, v: f64| {
                all_finite &= v.is_finite();
                out.table.push(vec![
                    name.clone(),
                    kind.into(),
                    repr.name().into(),
                    norm.into(),
                    sign.into(),
                    num(v),
                ]);
            };
            match f {
                Stored::Spatial(f) => {
                    let spec = if f.repr() == Repr::Frequency {
                        f.clone()
                    } else {
                        forward_transform(f)?
                    };
                    row(
                        "spatial",
                        f.repr(),
                        "hat-sobolev",
                        "",
                        sobolev_hat_norm(&spec, self.r, self.s)?,
                    );
                }
                Stored::Spacetime(u) => {
                    let spec = u.to_frequency()?;
                    for sign in [Sign::Plus, Sign::Minus] {
                        let v = xsb_norm(&spec, &NormParams::new(self.r, self.s, self.b, sign)?)?;
                        row("spacetime", u.repr(), "xsb", &sign.symbol().to_string(), v);
                    }
                    let radius = if self.radius > 0.0 {
                        self.radius
                    } else {
                        u.grid().half_time()
                    };
                    row(
                        "spacetime",
                        u.repr(),
                        "sup-time",
                        "",
                        sup_time_norm(&u.to_mixed()?, self.r, self.s, radius)?,
                    );
                }
            }
        }
        out.check("all norms finite", all_finite, None, "finite");
        Ok(())
    }
}
