//! Decode-and-forward rate lower bound, single-node cut upper bound, and
//! the high-SNR gap between them, for Gaussian-gain networks.
//!
//! Everything is closed form: with per-node power `P`, total noise
//! variance `N`, and edge gains `g`, decode-and-forward along a Steiner
//! tree achieves `log2(1 + g_min P/N)`, while the single-node cut allows at
//! most `log2(1 + g_max (|V|-1) P/N)`; the difference approaches
//! `log2((g_max/g_min) (|V|-1))` as `P/N` grows.

use crate::error::{Error, Result};
use crate::network::{Mode, Network};

#[derive(Clone, Copy, Debug)]
pub struct GaussianParams {
    /// Per-node transmit power constraint.
    pub power: f64,
    /// Total noise variance per complex sample.
    pub noise: f64,
}

impl GaussianParams {
    pub fn new(power: f64, noise: f64) -> Result<Self> {
        if !power.is_finite() || power <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "power must be finite and positive, got {power}"
            )));
        }
        if !noise.is_finite() || noise <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise must be finite and positive, got {noise}"
            )));
        }
        Ok(GaussianParams { power, noise })
    }

    pub fn snr(&self) -> f64 {
        self.power / self.noise
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingReport {
    pub g_min: f64,
    pub g_max: f64,
    pub node_count: usize,
    pub steiner_ok: bool,
    pub df_rate_bits: f64,
    pub cut_ub_bits: f64,
    pub gap_exact_bits: f64,
    pub gap_asymptotic_bits: f64,
    /// Informational variant of the cut upper bound that replaces the
    /// `|V|-1` receiver count by the source's actual out-degree. Not part
    /// of the bound pair above.
    pub cut_ub_source_outdeg_bits: f64,
}

fn check_gaussian(net: &Network) -> Result<(f64, f64)> {
    if net.mode() != Mode::Gaussian {
        return Err(Error::Mode(format!(
            "SNR scaling requires a gaussian network, got mode {}",
            net.mode().as_str()
        )));
    }
    let mut g_min = f64::INFINITY;
    let mut g_max: f64 = 0.0;
    for &(u, v) in net.edges() {
        let g = net.gain(u, v).expect("validated gain");
        g_min = g_min.min(g);
        g_max = g_max.max(g);
    }
    if net.edge_count() == 0 {
        return Err(Error::Validation("gaussian network has no edges".into()));
    }
    Ok((g_min, g_max))
}

/// Decode-and-forward rate `log2(1 + g_min P/N)` in bits. Requires a
/// Steiner tree: every destination reachable from the source.
pub fn df_rate(net: &Network, params: &GaussianParams) -> Result<f64> {
    let (g_min, _) = check_gaussian(net)?;
    if !net.steiner_reachability() {
        return Err(Error::Validation(
            "no Steiner tree with nonzero gains: some destination is unreachable from the source"
                .into(),
        ));
    }
    Ok((1.0 + g_min * params.snr()).log2())
}

/// Single-node cut upper bound `log2(1 + g_max (|V|-1) P/N)` in bits.
pub fn cut_upper_bound(net: &Network, params: &GaussianParams) -> Result<f64> {
    let (_, g_max) = check_gaussian(net)?;
    let receivers = (net.node_count() - 1) as f64;
    Ok((1.0 + g_max * receivers * params.snr()).log2())
}

/// Full scaling report: both bounds, the exact gap, and its high-SNR limit.
pub fn gap(net: &Network, params: &GaussianParams) -> Result<ScalingReport> {
    let (g_min, g_max) = check_gaussian(net)?;
    let df_rate_bits = df_rate(net, params)?;
    let cut_ub_bits = cut_upper_bound(net, params)?;
    let receivers = (net.node_count() - 1) as f64;
    let out_deg = net.out_neighbors(net.source()).len() as f64;
    Ok(ScalingReport {
        g_min,
        g_max,
        node_count: net.node_count(),
        steiner_ok: true,
        df_rate_bits,
        cut_ub_bits,
        gap_exact_bits: cut_ub_bits - df_rate_bits,
        gap_asymptotic_bits: (g_max / g_min * receivers).log2(),
        cut_ub_source_outdeg_bits: (1.0 + g_max * out_deg * params.snr()).log2(),
    })
}

impl ScalingReport {
    /// Key-value report, 6 decimal places.
    pub fn render(&self, params: &GaussianParams) -> String {
        let mut out = String::new();
        out.push_str(&format!("nodes={}\n", self.node_count));
        out.push_str(&format!("power={:.6}\n", params.power));
        out.push_str(&format!("noise={:.6}\n", params.noise));
        out.push_str(&format!("g_min={:.6}\n", self.g_min));
        out.push_str(&format!("g_max={:.6}\n", self.g_max));
        out.push_str(&format!("steiner_ok={}\n", self.steiner_ok));
        out.push_str(&format!("df_rate_bits={:.6}\n", self.df_rate_bits));
        out.push_str(&format!("cut_ub_bits={:.6}\n", self.cut_ub_bits));
        out.push_str(&format!("gap_exact_bits={:.6}\n", self.gap_exact_bits));
        out.push_str(&format!("gap_asymptotic_bits={:.6}\n", self.gap_asymptotic_bits));
        out.push_str(&format!(
            "cut_ub_source_outdeg_bits={:.6}\n",
            self.cut_ub_source_outdeg_bits
        ));
        out
    }
}
