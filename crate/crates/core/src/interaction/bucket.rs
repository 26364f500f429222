//! Significance buckets for interaction terms.

use serde::{Deserialize, Serialize};

pub const DARK_P: f64 = 0.01;
pub const DARK_MAGNITUDE: f64 = 2.8;
pub const MEDIUM_P: f64 = 0.05;
pub const MEDIUM_MAGNITUDE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Light,
    Medium,
    Dark,
}

impl Bucket {
    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Light => "light",
            Bucket::Medium => "medium",
            Bucket::Dark => "dark",
        }
    }
}

/// Direction of a non-additive shift: positive terms push toward a female
/// realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    FemaleSynergy,
    MaleSynergy,
}

impl Sign {
    pub fn of(value: f64) -> Sign {
        if value < 0.0 {
            Sign::MaleSynergy
        } else {
            Sign::FemaleSynergy
        }
    }

    pub fn hue(self) -> &'static str {
        match self {
            Sign::FemaleSynergy => "orange",
            Sign::MaleSynergy => "blue",
        }
    }
}

pub fn classify_bucket(i_value: f64, p_value: f64) -> Bucket {
    let magnitude = i_value.abs();
    if p_value < DARK_P && magnitude > DARK_MAGNITUDE {
        Bucket::Dark
    } else if p_value < MEDIUM_P && magnitude > MEDIUM_MAGNITUDE {
        Bucket::Medium
    } else {
        Bucket::Light
    }
}

/// Color class for rendered cells, e.g. `dark-orange`.
pub fn color_class(bucket: Bucket, sign: Sign) -> String {
    format!("{}-{}", bucket.as_str(), sign.hue())
}

/// Text marker: `▲`/`▼` for significant cells, `·` otherwise.
pub fn marker(bucket: Bucket, sign: Sign) -> &'static str {
    match (bucket, sign) {
        (Bucket::Light, _) => "·",
        (_, Sign::FemaleSynergy) => "▲",
        (_, Sign::MaleSynergy) => "▼",
    }
}
