//! Long-term, short-term and spectral branches and their gated fusion.
//!
//! The temporal branches discretize a continuous template at a coarse step `Δ_l` and a fine
//! step `Δ_s`; the spectral branch repacks each variable's real DFT and scans along the
//! frequency axis with step `Δ_f`.

mod gate;
mod spectral;

pub use gate::{fuse, GateParams};
pub use spectral::{inverse_spectral_transform, packed_bin, spectral_activity, spectral_transform};

use crate::aggregation::{AggregatorKind, AggregatorSpec};
use crate::error::{domain_err, Result};
use crate::kv::KvDocument;
use crate::numerics::Rng;
use crate::scan::{shrink_global_coupling, vi_forward, ScanOptions, ScanOutput, ScanState, ScanSystem};
use crate::series::MultivariateSeries;
use crate::ssm::{ContinuousSystem, SystemDims};

pub const DELTA_FREQ_RANGE: (f64, f64) = (0.001, 0.01);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Long,
    Short,
    Spectral,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Long, Branch::Short, Branch::Spectral];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Long => "long",
            Branch::Short => "short",
            Branch::Spectral => "spectral",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchConfig {
    pub delta_long: f64,
    pub delta_short: f64,
    pub delta_freq: f64,
    pub agg: AggregatorSpec,
    pub scan: ScanOptions,
}

impl Default for BranchConfig {
    fn default() -> Self {
        Self {
            delta_long: 1.0,
            delta_short: 0.01,
            delta_freq: 0.005,
            agg: AggregatorSpec::mean(),
            scan: ScanOptions::default(),
        }
    }
}

impl BranchConfig {
    /// Requires `0 < Δ_s ≤ Δ_l` and `Δ_f` inside [`DELTA_FREQ_RANGE`].
    ///
    /// `Δ_s = Δ_l` is accepted as a degenerate configuration in which both temporal branches
    /// coincide.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_short > 0.0) || !self.delta_long.is_finite() {
            return domain_err(format!("temporal steps must be positive and finite, got Δ_s = {}", self.delta_short));
        }
        if self.delta_short > self.delta_long {
            return domain_err(format!(
                "short-branch step {} must not exceed long-branch step {}",
                self.delta_short, self.delta_long
            ));
        }
        let (lo, hi) = DELTA_FREQ_RANGE;
        if !(lo..=hi).contains(&self.delta_freq) {
            return domain_err(format!("spectral step {} outside [{lo}, {hi}]", self.delta_freq));
        }
        self.agg.validate()
    }

    pub fn delta(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Long => self.delta_long,
            Branch::Short => self.delta_short,
            Branch::Spectral => self.delta_freq,
        }
    }

    pub fn write_kv(&self, doc: &mut KvDocument) {
        doc.set_f64("delta_long", self.delta_long);
        doc.set_f64("delta_short", self.delta_short);
        doc.set_f64("delta_freq", self.delta_freq);
        doc.set("agg", self.agg.kind.name());
    }

    /// Reads the steps and aggregator kind, keeping defaults for missing keys.
    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(v) = doc.get_f64("delta_long")? {
            cfg.delta_long = v;
        }
        if let Some(v) = doc.get_f64("delta_short")? {
            cfg.delta_short = v;
        }
        if let Some(v) = doc.get_f64("delta_freq")? {
            cfg.delta_freq = v;
        }
        if let Some(kind) = doc.get("agg") {
            cfg.agg = AggregatorSpec::of_kind(kind.parse()?, 0);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Continuous parameters behind the three branches.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchTemplates {
    /// One template discretized at all three steps.
    Shared(ContinuousSystem),
    /// Separate templates, indexed long, short, spectral.
    Independent(Box<[ContinuousSystem; 3]>),
}

impl BranchTemplates {
    /// Random templates whose pooled feedback is stable at every branch step for `vars`
    /// variables pooled with `kind`.
    pub fn random(
        dims: SystemDims,
        shared: bool,
        cfg: &BranchConfig,
        kind: AggregatorKind,
        vars: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        let stabilize = |mut sys: ContinuousSystem, branches: &[Branch]| -> Result<ContinuousSystem> {
            for &b in branches {
                sys = shrink_global_coupling(&sys, cfg.delta(b), kind, vars, cfg.scan.features, 0.98)?.0;
            }
            Ok(sys)
        };
        if shared {
            let sys = ContinuousSystem::random(dims, rng);
            Ok(Self::Shared(stabilize(sys, &Branch::ALL)?))
        } else {
            let mut make = |b: Branch| stabilize(ContinuousSystem::random(dims, rng), &[b]);
            Ok(Self::Independent(Box::new([make(Branch::Long)?, make(Branch::Short)?, make(Branch::Spectral)?])))
        }
    }

    pub fn template(&self, branch: Branch) -> &ContinuousSystem {
        match self {
            BranchTemplates::Shared(sys) => sys,
            BranchTemplates::Independent(list) => &list[branch as usize],
        }
    }

    pub fn write_kv(&self, doc: &mut KvDocument) {
        match self {
            BranchTemplates::Shared(sys) => {
                doc.set("templates", "shared");
                sys.write_kv_prefixed(doc, "");
            }
            BranchTemplates::Independent(list) => {
                doc.set("templates", "independent");
                for (b, sys) in Branch::ALL.iter().zip(list.iter()) {
                    sys.write_kv_prefixed(doc, &format!("{}.", b.name()));
                }
            }
        }
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        match doc.get("templates").unwrap_or("shared") {
            "shared" => Ok(Self::Shared(ContinuousSystem::from_kv(doc)?)),
            "independent" => {
                let get = |b: Branch| ContinuousSystem::from_kv_prefixed(doc, &format!("{}.", b.name()));
                Ok(Self::Independent(Box::new([get(Branch::Long)?, get(Branch::Short)?, get(Branch::Spectral)?])))
            }
            other => domain_err(format!("templates must be shared or independent, got {other:?}")),
        }
    }
}

/// Runs one branch from a zero state and returns the full scan output.
///
/// For [`Branch::Spectral`] the scan axis is the packed frequency axis.
pub fn run_branch_output(
    branch: Branch,
    cfg: &BranchConfig,
    templates: &BranchTemplates,
    x: &MultivariateSeries,
    record_states: bool,
) -> Result<ScanOutput> {
    cfg.validate()?;
    let sys = templates.template(branch);
    let scan_sys = ScanSystem::new(sys, cfg.delta(branch))?;
    let input = match branch {
        Branch::Spectral => spectral_transform(x)?,
        _ => x.clone(),
    };
    let dims = sys.dims();
    let agg = match cfg.agg.kind {
        AggregatorKind::Attention if cfg.agg.query.len() != dims.d_psi => AggregatorSpec::default_attention(dims.d_psi),
        _ => cfg.agg.clone(),
    };
    let init = ScanState::zeros(input.vars(), dims.d_h, dims.d_v);
    let opts = ScanOptions { record_states, ..cfg.scan };
    vi_forward(&scan_sys, &agg, &input, &init, &opts)
}

/// The `C × T` feature map of one branch.
pub fn run_branch(
    branch: Branch,
    cfg: &BranchConfig,
    templates: &BranchTemplates,
    x: &MultivariateSeries,
) -> Result<MultivariateSeries> {
    Ok(run_branch_output(branch, cfg, templates, x, false)?.y)
}

/// All three branch features and their fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutputs {
    pub long: MultivariateSeries,
    pub short: MultivariateSeries,
    pub spectral: MultivariateSeries,
    pub fused: MultivariateSeries,
}

/// Three branches plus gate.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchModel {
    pub config: BranchConfig,
    pub templates: BranchTemplates,
    pub gate: GateParams,
}

impl BranchModel {
    pub fn forward(&self, x: &MultivariateSeries) -> Result<BranchOutputs> {
        let long = run_branch(Branch::Long, &self.config, &self.templates, x)?;
        let short = run_branch(Branch::Short, &self.config, &self.templates, x)?;
        let spectral = run_branch(Branch::Spectral, &self.config, &self.templates, x)?;
        let fused = fuse(&self.gate, &long, &short, &spectral)?;
        Ok(BranchOutputs { long, short, spectral, fused })
    }

    pub fn to_kv(&self) -> KvDocument {
        let mut doc = KvDocument::new();
        self.config.write_kv(&mut doc);
        self.gate.write_kv(&mut doc);
        self.templates.write_kv(&mut doc);
        doc
    }

    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        Ok(Self {
            config: BranchConfig::from_kv(doc)?,
            templates: BranchTemplates::from_kv(doc)?,
            gate: GateParams::from_kv(doc)?,
        })
    }
}
