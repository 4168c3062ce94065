//! On-demand cloud cost model: dollars from hours, total time, the
//! cost-effectiveness ratio and region-scale savings extrapolation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const M2_PER_KM2: f64 = 1e6;
const SECONDS_PER_HOUR: f64 = 3600.0;

pub fn seconds_to_hours(seconds: f64) -> f64 {
    seconds / SECONDS_PER_HOUR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceSheet {
    /// Price per hour of compute.
    pub unit_price: f64,
    pub currency: String,
}

impl PriceSheet {
    pub fn new(unit_price: f64, currency: impl Into<String>) -> Result<Self> {
        if !(unit_price >= 0.0 && unit_price.is_finite()) {
            return Err(Error::input(format!("unit price must be non-negative, got {unit_price}")));
        }
        Ok(Self {
            unit_price,
            currency: currency.into(),
        })
    }

    pub fn usd(unit_price: f64) -> Result<Self> {
        Self::new(unit_price, "USD")
    }
}

/// A currency amount in whole cents, rounded half-up from a real amount.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cents(pub i64);

impl Cents {
    pub fn from_amount(amount: f64) -> Self {
        // Half-up at the cent; the tiny bias absorbs binary representation
        // error such as 4.2449999999... for 4.245.
        let scaled = amount * 100.0;
        Cents((scaled + 0.5 + scaled.abs() * 1e-12).floor() as i64)
    }

    pub fn as_amount(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = (abs / 100).to_string();
        let mut grouped = String::new();
        for (i, ch) in whole.chars().enumerate() {
            if i > 0 && (whole.len() - i).is_multiple_of(3) {
                grouped.push(',');
            }
            grouped.push(ch);
        }
        write!(f, "{sign}{grouped}.{:02}", abs % 100)
    }
}

/// `price * hours`.
pub fn compute_cost(price: &PriceSheet, hours: f64) -> Result<f64> {
    if !(hours >= 0.0 && hours.is_finite()) {
        return Err(Error::input(format!("hours must be non-negative, got {hours}")));
    }
    Ok(price.unit_price * hours)
}

/// Training time plus early-stopped clustering time.
pub fn total_time(t_train: f64, t_actual: f64) -> Result<f64> {
    if !(t_train >= 0.0 && t_actual >= 0.0) {
        return Err(Error::input("times must be non-negative"));
    }
    Ok(t_train + t_actual)
}

/// `t_actual / t_total`; smaller is more cost-effective.
pub fn cost_effectiveness(t_actual: f64, t_total: f64) -> Result<f64> {
    if !(t_total > 0.0) {
        return Err(Error::input(format!("total time must be positive, got {t_total}")));
    }
    if !(t_actual >= 0.0 && t_actual <= t_total) {
        return Err(Error::input(format!(
            "actual time {t_actual} must lie in [0, total time {t_total}]"
        )));
    }
    Ok(t_actual / t_total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub image_count: u64,
    pub saved_hours: f64,
    pub saved_amount: f64,
}

/// Scales per-image savings to a region of `area_km2`.
pub fn extrapolate_savings(
    area_km2: f64,
    image_area_m2: f64,
    mean_saved_hours_per_image: f64,
    price: &PriceSheet,
) -> Result<Extrapolation> {
    for (name, v) in [
        ("area", area_km2),
        ("image area", image_area_m2),
        ("saved hours per image", mean_saved_hours_per_image),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::input(format!("{name} must be positive, got {v}")));
        }
    }
    let ratio = area_km2 * M2_PER_KM2 / image_area_m2;
    // An area that is an exact multiple must not round up to one extra image.
    let nearest = ratio.round();
    let image_count = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    } as u64;
    let saved_hours = image_count as f64 * mean_saved_hours_per_image;
    Ok(Extrapolation {
        image_count,
        saved_hours,
        saved_amount: compute_cost(price, saved_hours)?,
    })
}

/// Times in hours and the resulting amounts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub currency: String,
    pub unit_price: f64,
    pub t_train: f64,
    pub t_actual: f64,
    /// Expected time for fully converged clustering.
    pub t_total: f64,
    /// `t_train + t_actual`.
    pub t_comp: f64,
    pub cost_effective: f64,
    pub amount_actual: Cents,
    pub amount_saved: Cents,
    pub extrapolation: Option<Extrapolation>,
}

impl CostReport {
    pub fn new(price: &PriceSheet, t_train: f64, t_actual: f64, t_total: f64) -> Result<Self> {
        let t_comp = total_time(t_train, t_actual)?;
        let cost_effective = cost_effectiveness(t_actual, t_total)?;
        Ok(Self {
            currency: price.currency.clone(),
            unit_price: price.unit_price,
            t_train,
            t_actual,
            t_total,
            t_comp,
            cost_effective,
            amount_actual: Cents::from_amount(compute_cost(price, t_comp)?),
            amount_saved: Cents::from_amount(compute_cost(price, t_total - t_actual)?),
            extrapolation: None,
        })
    }

    pub fn with_extrapolation(mut self, extrapolation: Extrapolation) -> Self {
        self.extrapolation = Some(extrapolation);
        self
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cur = &self.currency;
        writeln!(f, "unit price          {} {cur}/h", self.unit_price)?;
        writeln!(f, "training time       {:.6} h", self.t_train)?;
        writeln!(f, "early-stopped time  {:.6} h", self.t_actual)?;
        writeln!(f, "full-run time       {:.6} h", self.t_total)?;
        writeln!(f, "computation time    {:.6} h", self.t_comp)?;
        writeln!(f, "cost-effectiveness  {:.2}%", self.cost_effective * 100.0)?;
        writeln!(f, "computation cost    {} {cur}", self.amount_actual)?;
        write!(f, "saved cost          {} {cur}", self.amount_saved)?;
        if let Some(x) = &self.extrapolation {
            writeln!(f)?;
            writeln!(f, "images in region    {}", x.image_count)?;
            writeln!(f, "saved hours         {:.2} h", x.saved_hours)?;
            write!(f, "saved in region     {} {cur}", Cents::from_amount(x.saved_amount))?;
        }
        Ok(())
    }
}
