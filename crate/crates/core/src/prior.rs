//! Product priors over independent buyers, family tags and JSON persistence.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantile::{iron, QuantileDistribution, PROB_TOL};

/// Distribution family a prior claims to belong to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Concave revenue-quantile curve.
    Regular,
    /// Monotone hazard rate; strictly concave revenue curve.
    Mhr,
    /// Supports contained in [0, 1].
    Unit01,
    /// Supports contained in [1, H].
    OneToH(f64),
    Unknown,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Regular => "regular",
            Family::Mhr => "mhr",
            Family::Unit01 => "unit01",
            Family::OneToH(_) => "one_to_h",
            Family::Unknown => "unknown",
        }
    }

    pub fn parse(tag: &str, h: Option<f64>) -> Result<Self> {
        match tag {
            "regular" => Ok(Family::Regular),
            "mhr" => Ok(Family::Mhr),
            "unit01" => Ok(Family::Unit01),
            "one_to_h" => {
                let h = h.ok_or_else(|| Error::InvalidPrior("one_to_h needs H".into()))?;
                if h <= 1.0 {
                    return Err(Error::InvalidParameter("H must exceed 1".into()));
                }
                Ok(Family::OneToH(h))
            }
            "unknown" => Ok(Family::Unknown),
            _ => Err(Error::UnknownFamily),
        }
    }
}

/// Ordered collection of per-buyer priors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPrior {
    pub family: Family,
    pub buyers: Vec<QuantileDistribution>,
}

impl ProductPrior {
    pub fn new(family: Family, buyers: Vec<QuantileDistribution>) -> Result<Self> {
        let prior = ProductPrior { family, buyers };
        prior.validate()?;
        Ok(prior)
    }

    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.buyers.is_empty() {
            return Err(Error::InvalidPrior("no buyers".into()));
        }
        for b in &self.buyers {
            b.validate()?;
        }
        match self.family {
            Family::Unit01 => {
                if self.buyers.iter().any(|b| b.max_value() > 1.0 + PROB_TOL) {
                    return Err(Error::InvalidPrior("unit01 support exceeds 1".into()));
                }
            }
            Family::OneToH(h) => {
                if h <= 1.0 {
                    return Err(Error::InvalidParameter("H must exceed 1".into()));
                }
                let bad = self
                    .buyers
                    .iter()
                    .any(|b| b.min_value() < 1.0 - PROB_TOL || b.max_value() > h + PROB_TOL);
                if bad {
                    return Err(Error::InvalidPrior("support outside [1, H]".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True when every buyer's revenue curve already lies on its concave
    /// envelope (within `tol`), i.e. the prior is regular.
    pub fn is_regular(&self, tol: f64) -> bool {
        self.buyers.iter().all(|b| {
            let rc = b.revenue_curve();
            let hull = iron(&rc);
            rc.points.iter().all(|&(q, r)| hull.value_at(q) <= r + tol)
        })
    }

    /// Coordinatewise tail truncation.
    pub fn truncate_tail(&self, thetas: &[f64]) -> Result<Self> {
        if thetas.len() != self.buyers.len() {
            return Err(Error::InvalidParameter("theta count != buyer count".into()));
        }
        Ok(ProductPrior {
            family: Family::Unknown,
            buyers: self
                .buyers
                .iter()
                .zip(thetas)
                .map(|(b, &t)| b.truncate_tail(t))
                .collect(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })?;
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let prior: ProductPrior = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })?;
        prior.validate()?;
        Ok(prior)
    }
}

#[derive(Serialize, Deserialize)]
struct ProductPriorJson {
    family: String,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    buyers: Vec<QuantileDistribution>,
}

impl Serialize for ProductPrior {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let h = match self.family {
            Family::OneToH(h) => Some(h),
            _ => None,
        };
        ProductPriorJson {
            family: self.family.tag().to_string(),
            h,
            buyers: self.buyers.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProductPrior {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = ProductPriorJson::deserialize(deserializer)?;
        let family = Family::parse(&raw.family, raw.h).map_err(serde::de::Error::custom)?;
        Ok(ProductPrior {
            family,
            buyers: raw.buyers,
        })
    }
}
