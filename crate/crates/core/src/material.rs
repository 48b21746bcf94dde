//! Nematic mixture parameters and closed-form material properties.

use crate::error::Error;
use crate::EPSILON_0;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Shared thermotropic coefficients (N/m²) used for all built-in mixtures.
pub const DEFAULT_A_COEF: f64 = -6.5e5;
pub const DEFAULT_B_COEF: f64 = -16e5;
pub const DEFAULT_C_COEF: f64 = 39e5;

/// Built-in material table, parsed from the bundled data file.
const BUILTIN_TABLE: &str = include_str!("../data/materials.dat");

/// Normalization of the quartic term of the thermotropic energy density.
///
/// `TrQ2Sq` uses (C/2)(tr Q²)², `TrQ4` uses (C/2) tr(Q⁴). The two differ by a
/// factor of two via the traceless identity tr(Q⁴) = (tr Q²)²/2; with the
/// default coefficients only `TrQ2Sq` yields the usual room-temperature
/// nematic order S_eq ≈ 0.61, so it is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuarticConvention {
    #[default]
    TrQ2Sq,
    TrQ4,
}

/// How the single elastic constant L is derived from the Frank constants.
///
/// `FromK11` sets L = K11/(2 S_eq²) so the simulated splay Freedericksz
/// threshold matches the analytic V_c built from K11. `FromMeanK` uses the
/// three-constant average (K11+K22+K33)/3 instead of K11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElasticRule {
    #[default]
    FromK11,
    FromMeanK,
}

/// Dielectric, optical and elastic constants of one NLC mixture.
///
/// Elastic constants are stored in newton (pN-scale values), thermotropic
/// coefficients in N/m², permittivities relative. `n_o` and `delta_n` are the
/// ordinary index and birefringence at 532 nm.
#[derive(Debug, Clone, PartialEq)]
pub struct LCMaterial {
    pub name: String,
    pub eps_perp: f64,
    pub delta_eps: f64,
    pub n_o: f64,
    pub delta_n: f64,
    pub k11: f64,
    pub k22: f64,
    pub k33: f64,
    pub a_coef: f64,
    pub b_coef: f64,
    pub c_coef: f64,
    pub clearing_temp: f64,
}

impl LCMaterial {
    /// Validates the record invariants.
    pub fn validate(&self) -> Result<(), Error> {
        if self.eps_perp <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{}: eps_perp must be positive",
                self.name
            )));
        }
        if self.k11 <= 0.0 || self.k22 <= 0.0 || self.k33 <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{}: elastic constants must be positive",
                self.name
            )));
        }
        if self.c_coef <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{}: quartic coefficient C must be positive",
                self.name
            )));
        }
        if self.n_o <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "{}: ordinary index must exceed 1",
                self.name
            )));
        }
        Ok(())
    }

    /// ε∥ = ε⊥ + Δε.
    pub fn eps_par(&self) -> f64 {
        self.eps_perp + self.delta_eps
    }

    /// Average permittivity ε̃ = (2ε⊥ + ε∥)/3.
    pub fn eps_mean(&self) -> f64 {
        (2.0 * self.eps_perp + self.eps_par()) / 3.0
    }

    /// Extraordinary index n_e = n_o + Δn at 532 nm.
    pub fn n_e(&self) -> f64 {
        self.n_o + self.delta_n
    }

    /// Mean of the three Frank constants.
    pub fn mean_k(&self) -> f64 {
        (self.k11 + self.k22 + self.k33) / 3.0
    }
}

/// Bulk thermotropic energy density of a uniaxial state with order `s`.
pub fn uniaxial_thermotropic(material: &LCMaterial, s: f64, convention: QuarticConvention) -> f64 {
    // tr Q² = 2s²/3, tr Q³ = 2s³/9, tr Q⁴ = 2s⁴/9 for Q = s(nn − I/3).
    let t2 = 2.0 * s * s / 3.0;
    let t3 = 2.0 * s * s * s / 9.0;
    let quartic = match convention {
        QuarticConvention::TrQ2Sq => 0.5 * material.c_coef * t2 * t2,
        QuarticConvention::TrQ4 => 0.5 * material.c_coef * (t2 * t2 / 2.0),
    };
    material.a_coef * t2 + 2.0 * material.b_coef / 3.0 * t3 + quartic
}

/// Nonzero minimizer of the uniaxial thermotropic energy (default convention).
pub fn equilibrium_order(material: &LCMaterial) -> Result<f64, Error> {
    equilibrium_order_with(material, QuarticConvention::default())
}

/// Nonzero minimizer of the uniaxial thermotropic energy.
///
/// Under `TrQ2Sq` this is S_eq = (−B + √(B² − 24AC))/(4C); under `TrQ4` the
/// discriminant factor is 12 and the denominator 2C. Fails when the
/// discriminant is negative (no nematic minimum).
pub fn equilibrium_order_with(
    material: &LCMaterial,
    convention: QuarticConvention,
) -> Result<f64, Error> {
    material.validate()?;
    let (a, b, c) = (material.a_coef, material.b_coef, material.c_coef);
    let s = match convention {
        QuarticConvention::TrQ2Sq => {
            let disc = b * b - 24.0 * a * c;
            if disc < 0.0 {
                return Err(Error::Domain(
                    "B^2 - 24AC < 0: no nematic minimum".to_string(),
                ));
            }
            (-b + disc.sqrt()) / (4.0 * c)
        }
        QuarticConvention::TrQ4 => {
            let disc = b * b - 12.0 * a * c;
            if disc < 0.0 {
                return Err(Error::Domain(
                    "B^2 - 12AC < 0: no nematic minimum".to_string(),
                ));
            }
            (-b + disc.sqrt()) / (2.0 * c)
        }
    };
    // Stationarity check: the analytic dF_th/dS must vanish at the root.
    let quartic_slope = match convention {
        QuarticConvention::TrQ2Sq => 8.0 * c / 9.0 * s * s * s,
        QuarticConvention::TrQ4 => 4.0 * c / 9.0 * s * s * s,
    };
    let slope = 4.0 * a / 3.0 * s + 4.0 * b / 9.0 * s * s + quartic_slope;
    let scale = (a.abs() + b.abs() * s.abs() + c * s * s) * s.abs();
    if slope.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "equilibrium order failed the stationarity check (dF/dS = {slope:.3e})"
        )));
    }
    Ok(s)
}

/// Splay Freedericksz threshold V_c = π √(K11/(ε₀ Δε)).
///
/// Requires Δε > 0; with negative anisotropy the planar state is not
/// destabilized by a field across the cell.
pub fn freedericksz_threshold(material: &LCMaterial) -> Result<f64, Error> {
    if material.delta_eps <= 0.0 {
        return Err(Error::Domain(format!(
            "{}: delta_eps <= 0, no splay Freedericksz transition",
            material.name
        )));
    }
    Ok(core::f64::consts::PI * (material.k11 / (EPSILON_0 * material.delta_eps)).sqrt())
}

/// Parses a material table in the bundled text format.
///
/// Nine whitespace-separated columns per record, with an optional trailing
/// `a b c` triple overriding the shared thermotropic coefficients. Elastic
/// constants are given in pN and converted to N here.
pub fn parse_materials(text: &str) -> Result<Vec<LCMaterial>, Error> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 9 && fields.len() != 12 {
            return Err(Error::InvalidInput(format!(
                "materials line {}: expected 9 or 12 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64, Error> {
            fields[i].parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!(
                    "materials line {}: bad number {:?}",
                    lineno + 1,
                    fields[i]
                ))
            })
        };
        let (a, b, c) = if fields.len() == 12 {
            (num(9)?, num(10)?, num(11)?)
        } else {
            (DEFAULT_A_COEF, DEFAULT_B_COEF, DEFAULT_C_COEF)
        };
        let material = LCMaterial {
            name: fields[0].to_string(),
            eps_perp: num(1)?,
            delta_eps: num(2)?,
            n_o: num(3)?,
            delta_n: num(4)?,
            k11: num(5)? * 1e-12,
            k22: num(6)? * 1e-12,
            k33: num(7)? * 1e-12,
            a_coef: a,
            b_coef: b,
            c_coef: c,
            clearing_temp: num(8)?,
        };
        material.validate()?;
        out.push(material);
    }
    Ok(out)
}

/// The bundled mixtures (5CB, BLO48, RDP-84909, E7).
pub fn builtin_materials() -> Vec<LCMaterial> {
    parse_materials(BUILTIN_TABLE).expect("bundled material table is well-formed")
}

/// Looks up a bundled mixture by name (case-sensitive).
pub fn builtin_material(name: &str) -> Option<LCMaterial> {
    builtin_materials().into_iter().find(|m| m.name == name)
}
