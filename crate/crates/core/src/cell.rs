//! Layered device geometry and solver state.
//!
//! A cell is an LC layer of thickness `lc_thickness` sandwiched between
//! optional fixed-permittivity dielectric layers (polyimide by default) with
//! electrodes either directly at the LC boundaries (ITO between PI and LC,
//! the default) or outside the dielectric stack. Grid electrodes are periodic
//! stripes along x; the 2D solve covers one period.

use crate::error::Error;
use crate::qtensor::QTensor;
use alloc::format;
use alloc::vec::Vec;
use nalgebra::Vector3;

#[allow(unused_imports)]
use num_traits::Float;

/// One fixed dielectric layer of the stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricLayer {
    pub thickness: f64,
    /// Low-frequency relative permittivity.
    pub eps: f64,
    /// Optical refractive index (for the transmittance stack).
    pub optical_index: f64,
}

impl DielectricLayer {
    /// 50 um polyimide: eps = 3.5, optical index 1.60.
    pub fn polyimide_default() -> Self {
        DielectricLayer {
            thickness: 50e-6,
            eps: 3.5,
            optical_index: 1.60,
        }
    }
}

/// Electrode layout on each boundary plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElectrodePattern {
    Plate,
    /// Periodic stripes of `width` separated by `gap` (one period = width + gap).
    Grid { width: f64, gap: f64 },
}

/// Where the electrode planes sit relative to the dielectric layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElectrodePlacement {
    /// ITO between the dielectric layers and the LC: the LC sees the full
    /// applied voltage. Default; reproduces the analytic threshold.
    #[default]
    AdjacentToLc,
    /// Electrodes on the outer faces: the dielectric layers divide the
    /// voltage in series with the LC.
    OutsideDielectrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnchoringMode {
    /// Boundary rows pinned to the easy axis at equilibrium order.
    #[default]
    Strong,
    /// Natural boundary condition (zero normal derivative of Q).
    Free,
}

/// Device geometry, anchoring and grid resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStack {
    pub lc_thickness: f64,
    /// Fixed layers below the LC, listed from the LC outward.
    pub lower_layers: Vec<DielectricLayer>,
    /// Fixed layers above the LC, listed from the LC outward.
    pub upper_layers: Vec<DielectricLayer>,
    pub electrode_pattern: ElectrodePattern,
    pub electrode_placement: ElectrodePlacement,
    /// Shift of the top finger pattern, as a fraction of the period.
    pub electrode_offset_frac: f64,
    pub anchoring_easy_axis: Vector3<f64>,
    pub anchoring_mode: AnchoringMode,
    /// Nodes across the LC layer.
    pub grid_nz: usize,
    /// Nodes along one electrode period (2D solves).
    pub grid_nx: usize,
}

impl Default for CellStack {
    fn default() -> Self {
        CellStack {
            lc_thickness: 80e-6,
            lower_layers: alloc::vec![DielectricLayer::polyimide_default()],
            upper_layers: alloc::vec![DielectricLayer::polyimide_default()],
            electrode_pattern: ElectrodePattern::Grid {
                width: 1e-6,
                gap: 49e-6,
            },
            electrode_placement: ElectrodePlacement::AdjacentToLc,
            electrode_offset_frac: 0.0,
            anchoring_easy_axis: Vector3::x(),
            anchoring_mode: AnchoringMode::Strong,
            grid_nz: 129,
            grid_nx: 128,
        }
    }
}

impl CellStack {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.lc_thickness > 0.0) {
            return Err(Error::InvalidInput("lc_thickness must be positive".into()));
        }
        for layer in self.lower_layers.iter().chain(&self.upper_layers) {
            if !(layer.thickness > 0.0) || !(layer.eps > 0.0) {
                return Err(Error::InvalidInput(
                    "dielectric layers need positive thickness and permittivity".into(),
                ));
            }
        }
        if self.grid_nz < 17 {
            return Err(Error::InvalidInput(format!(
                "grid_nz must be at least 17, got {}",
                self.grid_nz
            )));
        }
        if let ElectrodePattern::Grid { width, gap } = self.electrode_pattern {
            if !(width > 0.0) || !(gap >= 0.0) {
                return Err(Error::InvalidInput(
                    "grid electrode width must be positive and gap non-negative".into(),
                ));
            }
            if width >= width + gap && gap > 0.0 {
                return Err(Error::InvalidInput(
                    "grid electrode width must be below the period".into(),
                ));
            }
            if self.grid_nx < 4 {
                return Err(Error::InvalidInput("grid_nx must be at least 4".into()));
            }
        }
        if (self.anchoring_easy_axis.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "anchoring easy axis must be a unit vector".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.electrode_offset_frac) {
            return Err(Error::InvalidInput(
                "electrode_offset_frac must lie in [0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Electrode period along x (grid pattern); the LC thickness is used as a
    /// nominal period for plate electrodes so 2D grids stay well-formed.
    pub fn period(&self) -> f64 {
        match self.electrode_pattern {
            ElectrodePattern::Grid { width, gap } => width + gap,
            ElectrodePattern::Plate => self.lc_thickness,
        }
    }

    /// Node spacing across the LC.
    pub fn hz(&self) -> f64 {
        self.lc_thickness / (self.grid_nz - 1) as f64
    }

    /// Node spacing along x.
    pub fn hx(&self) -> f64 {
        self.period() / self.grid_nx as f64
    }

    /// Whether x-node `i` lies on an electrode finger of the given plane.
    pub fn is_finger(&self, i: usize, top: bool) -> bool {
        match self.electrode_pattern {
            ElectrodePattern::Plate => true,
            ElectrodePattern::Grid { width, .. } => {
                let p = self.period();
                let hx = self.hx();
                let xc = 0.5 * p + if top { self.electrode_offset_frac * p } else { 0.0 };
                let x = i as f64 * hx;
                let mut d = (x - xc).rem_euclid(p);
                if d > 0.5 * p {
                    d = p - d;
                }
                if d <= 0.5 * width + 1e-12 * p {
                    return true;
                }
                // A finger narrower than the grid spacing still pins the
                // nearest node.
                let nearest = ((xc / hx).round() as usize) % self.grid_nx;
                width < hx && i == nearest
            }
        }
    }

    /// z-grid layout of the full electrical domain (dielectric layers are
    /// discretized on the LC node spacing, at least one cell each).
    pub fn z_layout(&self) -> ZLayout {
        let hz = self.hz();
        let cells = |layers: &[DielectricLayer]| -> Vec<usize> {
            layers
                .iter()
                .map(|l| ((l.thickness / hz).round() as usize).max(1))
                .collect()
        };
        let lower_cells = cells(&self.lower_layers);
        let upper_cells = cells(&self.upper_layers);
        let lower_total: usize = lower_cells.iter().sum();
        let upper_total: usize = upper_cells.iter().sum();
        ZLayout {
            hz,
            lower_cells,
            upper_cells,
            nz_lc: self.grid_nz,
            lc_bottom: lower_total,
            nz_total: lower_total + self.grid_nz + upper_total,
        }
    }
}

/// Discretized z-extent of the electrical domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ZLayout {
    pub hz: f64,
    /// Cells per lower dielectric layer, LC outward.
    pub lower_cells: Vec<usize>,
    /// Cells per upper dielectric layer, LC outward.
    pub upper_cells: Vec<usize>,
    pub nz_lc: usize,
    /// Global z-index of the lowest LC node.
    pub lc_bottom: usize,
    pub nz_total: usize,
}

impl ZLayout {
    pub fn lc_top(&self) -> usize {
        self.lc_bottom + self.nz_lc - 1
    }

    /// Whether global index `j` is an LC node.
    pub fn is_lc(&self, j: usize) -> bool {
        j >= self.lc_bottom && j <= self.lc_top()
    }

    /// Static permittivity of the dielectric layer holding global node `j`
    /// (LC nodes return `None`).
    pub fn cover_eps(&self, j: usize, stack: &CellStack) -> Option<f64> {
        if self.is_lc(j) {
            return None;
        }
        if j < self.lc_bottom {
            // Walk outward from the LC: the first lower layer starts just
            // below lc_bottom.
            let mut upper_edge = self.lc_bottom;
            for (k, cells) in self.lower_cells.iter().enumerate() {
                let lower_edge = upper_edge - cells;
                if j >= lower_edge {
                    return Some(stack.lower_layers[k].eps);
                }
                upper_edge = lower_edge;
            }
            Some(stack.lower_layers.last().expect("layer exists").eps)
        } else {
            let mut lower_edge = self.lc_top();
            for (k, cells) in self.upper_cells.iter().enumerate() {
                let upper_edge = lower_edge + cells;
                if j <= upper_edge {
                    return Some(stack.upper_layers[k].eps);
                }
                lower_edge = upper_edge;
            }
            Some(stack.upper_layers.last().expect("layer exists").eps)
        }
    }
}

/// Converged 1D solution across the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState1D {
    /// Q at each LC node, bottom to top.
    pub q: Vec<QTensor>,
    /// Potential at each LC node (V).
    pub u: Vec<f64>,
    pub applied_voltage: f64,
    /// Max-norm of the molecular field at convergence, in units of the
    /// elastic reference field π² L S_eq / d².
    pub residual: f64,
    /// Total free energy per unit area (J/m²) at the final potential.
    pub energy: f64,
}

impl CellState1D {
    /// Uniform state with a given tensor everywhere (used for forced
    /// configurations such as ideal homeotropic alignment).
    pub fn uniform(stack: &CellStack, q: QTensor, voltage: f64) -> Self {
        CellState1D {
            q: alloc::vec![q; stack.grid_nz],
            u: alloc::vec![0.0; stack.grid_nz],
            applied_voltage: voltage,
            residual: 0.0,
            energy: 0.0,
        }
    }
}

/// Converged 2D solution over one electrode period.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState2D {
    pub nx: usize,
    /// LC nodes across z.
    pub nz: usize,
    /// Q at LC nodes, index `j * nx + i` (j across the LC).
    pub q: Vec<QTensor>,
    /// Potential on the full electrical domain, index `j * nx + i`.
    pub u: Vec<f64>,
    pub layout: ZLayout,
    pub applied_voltage: f64,
    pub residual: f64,
    /// Total free energy per unit length along y (J/m).
    pub energy: f64,
}

impl CellState2D {
    pub fn q_at(&self, i: usize, j: usize) -> QTensor {
        self.q[j * self.nx + i]
    }

    pub fn u_at(&self, i: usize, j_global: usize) -> f64 {
        self.u[j_global * self.nx + i]
    }

    /// Director and order down one x-column, bottom to top.
    pub fn column_directors(&self, i: usize) -> Vec<(Vector3<f64>, f64)> {
        (0..self.nz)
            .map(|j| self.q_at(i, j).director_order())
            .collect()
    }
}
