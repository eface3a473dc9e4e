//! Coolant and solid thermophysical properties.
//!
//! Helium properties come from a temperature-indexed table at a fixed system
//! pressure. The bundled table is generated from an analytic approximation
//! (ideal-gas density, power-law transport properties, constant specific heat);
//! users with reference data can load a file of the same schema instead.
//! Solid materials (graphite, fuel compact) are quartic polynomials in
//! temperature with a declared validity range.

use std::io::Read;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Universal gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.314462;

/// Nominal HTGR primary-circuit pressure, Pa.
pub const NOMINAL_PRESSURE: f64 = 7.0e6;

#[derive(Debug, Error)]
pub enum PropertyError {
    #[error("table spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("table range is empty: t_min {t_min} >= t_max {t_max}")]
    EmptyRange { t_min: f64, t_max: f64 },
    #[error("property table needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-uniform temperature spacing at row {row}: expected {expected} K, found {found} K")]
    NonUniformSpacing { row: usize, expected: f64, found: f64 },
    #[error("invalid sample at row {row}: {reason}")]
    InvalidSample { row: usize, reason: String },
    #[error("temperature {value} K outside validity range [{min}, {max}] K for {material}")]
    OutOfRange {
        material: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("cannot read property data from {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed property data: {0}")]
    Csv(#[from] csv::Error),
}

/// One row of the coolant property table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidStateSample {
    /// K
    pub temperature: f64,
    /// kg/m³
    pub density: f64,
    /// Pa·s
    pub dynamic_viscosity: f64,
    /// W/(m·K)
    pub thermal_conductivity: f64,
    /// J/(kg·K)
    pub specific_heat: f64,
    /// J/kg
    pub specific_enthalpy: f64,
}

impl FluidStateSample {
    fn lerp(&self, other: &Self, alpha: f64) -> Self {
        let mix = |a: f64, b: f64| (1.0 - alpha) * a + alpha * b;
        Self {
            temperature: mix(self.temperature, other.temperature),
            density: mix(self.density, other.density),
            dynamic_viscosity: mix(self.dynamic_viscosity, other.dynamic_viscosity),
            thermal_conductivity: mix(self.thermal_conductivity, other.thermal_conductivity),
            specific_heat: mix(self.specific_heat, other.specific_heat),
            specific_enthalpy: mix(self.specific_enthalpy, other.specific_enthalpy),
        }
    }

    pub fn kinematic_viscosity(&self) -> f64 {
        self.dynamic_viscosity / self.density
    }

    pub fn prandtl(&self) -> f64 {
        self.dynamic_viscosity * self.specific_heat / self.thermal_conductivity
    }
}

/// Analytic helium approximation used for the bundled table.
///
/// This is not reference-quality data: density is ideal gas, viscosity and
/// conductivity are power laws fitted near HTGR conditions, and `c_p` is the
/// monatomic constant. Load a data file for anything beyond desk studies.
#[derive(Debug, Clone, Copy)]
pub struct HeliumModel;

impl HeliumModel {
    /// kg/mol
    pub const MOLAR_MASS: f64 = 0.004002;
    pub const SPECIFIC_HEAT: f64 = 5193.0;

    pub fn density(pressure: f64, temperature: f64) -> f64 {
        pressure * Self::MOLAR_MASS / (GAS_CONSTANT * temperature)
    }

    pub fn viscosity(temperature: f64) -> f64 {
        3.674e-7 * temperature.powf(0.7)
    }

    pub fn conductivity(temperature: f64) -> f64 {
        2.682e-3 * temperature.powf(0.71)
    }

    /// Enthalpy referenced to zero at 0 K.
    pub fn enthalpy(temperature: f64) -> f64 {
        Self::SPECIFIC_HEAT * temperature
    }

    pub fn sample(pressure: f64, temperature: f64) -> FluidStateSample {
        FluidStateSample {
            temperature,
            density: Self::density(pressure, temperature),
            dynamic_viscosity: Self::viscosity(temperature),
            thermal_conductivity: Self::conductivity(temperature),
            specific_heat: Self::SPECIFIC_HEAT,
            specific_enthalpy: Self::enthalpy(temperature),
        }
    }
}

/// Coolant properties on a uniform temperature grid at fixed pressure.
///
/// Lookups outside the grid clamp to the end samples and bump a counter that
/// the run manifest reports.
#[derive(Debug)]
pub struct FluidPropertyTable {
    pressure: f64,
    t_min: f64,
    spacing: f64,
    samples: Vec<FluidStateSample>,
    clamps: AtomicU64,
}

impl Clone for FluidPropertyTable {
    fn clone(&self) -> Self {
        Self {
            pressure: self.pressure,
            t_min: self.t_min,
            spacing: self.spacing,
            samples: self.samples.clone(),
            clamps: AtomicU64::new(self.clamps.load(Ordering::Relaxed)),
        }
    }
}

impl FluidPropertyTable {
    /// Builds the bundled helium table spanning `[t_min, t_max]`.
    pub fn helium(pressure: f64, t_min: f64, t_max: f64, spacing: f64) -> Result<Self, PropertyError> {
        if !(spacing > 0.0) {
            return Err(PropertyError::NonPositiveSpacing(spacing));
        }
        if !(t_min < t_max) {
            return Err(PropertyError::EmptyRange { t_min, t_max });
        }
        let intervals = ((t_max - t_min) / spacing - 1e-9).ceil() as usize;
        let samples = (0..=intervals)
            .map(|i| HeliumModel::sample(pressure, t_min + i as f64 * spacing))
            .collect();
        Self::from_samples(pressure, samples)
    }

    /// Default bundled table: 7 MPa, 1 K spacing over [500 K, 2100 K].
    pub fn default_helium() -> Self {
        Self::helium(NOMINAL_PRESSURE, 500.0, 2100.0, 1.0).expect("default helium table parameters are valid")
    }

    /// Validates and wraps user-provided samples.
    pub fn from_samples(pressure: f64, samples: Vec<FluidStateSample>) -> Result<Self, PropertyError> {
        if samples.len() < 2 {
            return Err(PropertyError::TooFewSamples(samples.len()));
        }
        let t_min = samples[0].temperature;
        let spacing = samples[1].temperature - t_min;
        if !(spacing > 0.0) {
            return Err(PropertyError::NonPositiveSpacing(spacing));
        }
        for (row, s) in samples.iter().enumerate() {
            let fields = [
                s.temperature,
                s.density,
                s.dynamic_viscosity,
                s.thermal_conductivity,
                s.specific_heat,
                s.specific_enthalpy,
            ];
            if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(PropertyError::InvalidSample {
                    row,
                    reason: "all fields must be finite and strictly positive".into(),
                });
            }
            if row > 0 {
                let prev = &samples[row - 1];
                let found = s.temperature - prev.temperature;
                if ((found - spacing) / spacing).abs() > 1e-9 {
                    return Err(PropertyError::NonUniformSpacing { row, expected: spacing, found });
                }
                if s.specific_enthalpy <= prev.specific_enthalpy {
                    return Err(PropertyError::InvalidSample {
                        row,
                        reason: "enthalpy must increase with temperature".into(),
                    });
                }
                if s.density > prev.density {
                    return Err(PropertyError::InvalidSample {
                        row,
                        reason: "density must not increase with temperature".into(),
                    });
                }
            }
        }
        Ok(Self {
            pressure,
            t_min,
            spacing,
            samples,
            clamps: AtomicU64::new(0),
        })
    }

    /// Reads a delimited file with header `T,rho,mu,lambda,cp,h` (SI units).
    pub fn from_csv_path(pressure: f64, path: &Path) -> Result<Self, PropertyError> {
        let file = std::fs::File::open(path).map_err(|source| PropertyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_reader(pressure, file)
    }

    pub fn from_csv_reader<R: Read>(pressure: f64, reader: R) -> Result<Self, PropertyError> {
        #[derive(Deserialize)]
        struct Row {
            #[serde(rename = "T")]
            t: f64,
            rho: f64,
            mu: f64,
            lambda: f64,
            cp: f64,
            h: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["T", "rho", "mu", "lambda", "cp", "h"];
        if headers.len() != expected.len() || headers.iter().zip(expected).any(|(a, b)| a != b) {
            return Err(PropertyError::InvalidSample {
                row: 0,
                reason: format!("header must be `T,rho,mu,lambda,cp,h`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let r: Row = row?;
            samples.push(FluidStateSample {
                temperature: r.t,
                density: r.rho,
                dynamic_viscosity: r.mu,
                thermal_conductivity: r.lambda,
                specific_heat: r.cp,
                specific_enthalpy: r.h,
            });
        }
        Self::from_samples(pressure, samples)
    }

    /// Writes the table in the same schema `from_csv_reader` accepts.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), PropertyError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["T", "rho", "mu", "lambda", "cp", "h"])?;
        for s in &self.samples {
            w.write_record(
                [
                    s.temperature,
                    s.density,
                    s.dynamic_viscosity,
                    s.thermal_conductivity,
                    s.specific_heat,
                    s.specific_enthalpy,
                ]
                .iter()
                .map(|v| format!("{v:.16e}")),
            )?;
        }
        w.flush().map_err(|source| PropertyError::Io { path: "<writer>".into(), source })?;
        Ok(())
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].temperature
    }

    pub fn samples(&self) -> &[FluidStateSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Number of out-of-range lookups so far.
    pub fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    pub fn reset_clamp_count(&self) {
        self.clamps.store(0, Ordering::Relaxed);
    }

    /// Piecewise-linear lookup; clamps (and counts) outside the grid.
    pub fn interpolate(&self, temperature: f64) -> FluidStateSample {
        let last = self.samples.len() - 1;
        if !(temperature > self.t_min) {
            if temperature < self.t_min || temperature.is_nan() {
                self.clamps.fetch_add(1, Ordering::Relaxed);
            }
            return self.samples[0];
        }
        if temperature >= self.samples[last].temperature {
            if temperature > self.samples[last].temperature {
                self.clamps.fetch_add(1, Ordering::Relaxed);
            }
            return self.samples[last];
        }
        let x = (temperature - self.t_min) / self.spacing;
        let i = (x.floor() as usize).min(last - 1);
        let alpha = x - i as f64;
        if alpha <= 1e-12 {
            return self.samples[i];
        }
        if alpha >= 1.0 - 1e-12 {
            return self.samples[i + 1];
        }
        self.samples[i].lerp(&self.samples[i + 1], alpha)
    }

    /// Inverse lookup of temperature from specific enthalpy (clamped).
    pub fn temperature_from_enthalpy(&self, enthalpy: f64) -> f64 {
        let s = &self.samples;
        if enthalpy <= s[0].specific_enthalpy {
            if enthalpy < s[0].specific_enthalpy {
                self.clamps.fetch_add(1, Ordering::Relaxed);
            }
            return s[0].temperature;
        }
        let last = s.len() - 1;
        if enthalpy >= s[last].specific_enthalpy {
            if enthalpy > s[last].specific_enthalpy {
                self.clamps.fetch_add(1, Ordering::Relaxed);
            }
            return s[last].temperature;
        }
        let i = s.partition_point(|p| p.specific_enthalpy <= enthalpy) - 1;
        let (a, b) = (&s[i], &s[i + 1]);
        let alpha = (enthalpy - a.specific_enthalpy) / (b.specific_enthalpy - a.specific_enthalpy);
        a.temperature + alpha * (b.temperature - a.temperature)
    }

    /// Density at a different system pressure, scaled as an ideal gas.
    pub fn density_at_pressure(&self, temperature: f64, pressure: f64) -> f64 {
        self.interpolate(temperature).density * pressure / self.pressure
    }
}

/// Which polynomial of a [`SolidMaterialModel`] to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolidProperty {
    Conductivity,
    SpecificHeat,
}

/// A solid whose conductivity and specific heat are quartics in temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidMaterialModel {
    pub name: String,
    /// Ascending coefficients, W/(m·K).
    pub conductivity_poly: [f64; 5],
    /// Ascending coefficients, J/(kg·K).
    pub specific_heat_poly: [f64; 5],
    /// kg/m³
    pub density: f64,
    #[serde(default = "default_valid_min")]
    pub valid_min: f64,
    #[serde(default = "default_valid_max")]
    pub valid_max: f64,
}

fn default_valid_min() -> f64 {
    300.0
}

fn default_valid_max() -> f64 {
    2000.0
}

fn horner(coeffs: &[f64; 5], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl SolidMaterialModel {
    pub fn new(name: impl Into<String>, conductivity_poly: [f64; 5], specific_heat_poly: [f64; 5], density: f64) -> Self {
        Self {
            name: name.into(),
            conductivity_poly,
            specific_heat_poly,
            density,
            valid_min: default_valid_min(),
            valid_max: default_valid_max(),
        }
    }

    /// Nuclear graphite: quartic refits of a Butland–Maddison style
    /// specific heat (714 → 2012 J/(kg·K) over 300–2000 K) and an irradiated
    /// conductivity falling from about 40 to 24 W/(m·K).
    pub fn graphite() -> Self {
        Self::new(
            "graphite",
            [4.6279581240e+01, -2.2402119359e-02, 5.6933196793e-06, 1.3900074342e-09, -7.1371249217e-13],
            [-5.7024598487e+02, 5.6540527508e+00, -5.2271482455e-03, 2.2897201141e-06, -3.8345691711e-10],
            1740.0,
        )
    }

    /// Fuel compact: 0.92 of the graphite specific heat and a conductivity
    /// falling from about 15 to 11.5 W/(m·K).
    pub fn fuel_compact() -> Self {
        Self::new(
            "fuel_compact",
            [1.5547372209e+01, -8.6657146368e-04, -4.3378840053e-06, 3.3996469827e-09, -7.6167397639e-13],
            [-5.2462630608e+02, 5.2017285308e+00, -4.8089763858e-03, 2.1065425050e-06, -3.5278036374e-10],
            1900.0,
        )
    }

    pub fn property(&self, which: SolidProperty, temperature: f64) -> Result<f64, PropertyError> {
        if !(temperature >= self.valid_min && temperature <= self.valid_max) {
            return Err(PropertyError::OutOfRange {
                material: self.name.clone(),
                value: temperature,
                min: self.valid_min,
                max: self.valid_max,
            });
        }
        Ok(match which {
            SolidProperty::Conductivity => horner(&self.conductivity_poly, temperature),
            SolidProperty::SpecificHeat => horner(&self.specific_heat_poly, temperature),
        })
    }

    pub fn conductivity(&self, temperature: f64) -> Result<f64, PropertyError> {
        self.property(SolidProperty::Conductivity, temperature)
    }

    pub fn specific_heat(&self, temperature: f64) -> Result<f64, PropertyError> {
        self.property(SolidProperty::SpecificHeat, temperature)
    }

    /// ∫ c_p dT from 0 K, J/kg. Used for energy bookkeeping.
    pub fn specific_energy(&self, temperature: f64) -> f64 {
        let c = &self.specific_heat_poly;
        let t = temperature;
        t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * (c[3] / 4.0 + t * c[4] / 5.0))))
    }

    /// Mean specific heat between two temperatures, falling back to the
    /// point value when they coincide.
    pub fn mean_specific_heat(&self, t_a: f64, t_b: f64) -> Result<f64, PropertyError> {
        if (t_a - t_b).abs() < 1e-9 {
            return self.specific_heat(0.5 * (t_a + t_b));
        }
        self.property(SolidProperty::SpecificHeat, t_a)?;
        self.property(SolidProperty::SpecificHeat, t_b)?;
        Ok((self.specific_energy(t_b) - self.specific_energy(t_a)) / (t_b - t_a))
    }

    /// Checks positivity of both polynomials over the validity range.
    pub fn validate(&self) -> Result<(), PropertyError> {
        let n = 400;
        for i in 0..=n {
            let t = self.valid_min + (self.valid_max - self.valid_min) * i as f64 / n as f64;
            for which in [SolidProperty::Conductivity, SolidProperty::SpecificHeat] {
                let v = self.property(which, t)?;
                if !(v > 0.0) {
                    return Err(PropertyError::InvalidSample {
                        row: i,
                        reason: format!("{} {:?} non-positive ({v}) at {t} K", self.name, which),
                    });
                }
            }
        }
        if !(self.density > 0.0) {
            return Err(PropertyError::InvalidSample {
                row: 0,
                reason: format!("{} density must be positive", self.name),
            });
        }
        Ok(())
    }
}
