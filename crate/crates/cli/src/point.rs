//! State and channel parameters shared by `compute`, `export` and `sweep`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nongauss::catalog::{CatalogSpec, Family};
use nongauss::channels;
use nongauss::{non_gaussianity, ChannelParams, FockState, NonGaussianityResult, C64};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::range::{parse_counts, parse_range};
use crate::statefile::{Metadata, StateFile};
use crate::table::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyKind {
    Fock,
    Cat,
    BellPhi,
    BellPsi,
    Squeezed,
    Coherent,
    Thermal,
    Random,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Fock => "fock",
            FamilyKind::Cat => "cat",
            FamilyKind::BellPhi => "bell-phi",
            FamilyKind::BellPsi => "bell-psi",
            FamilyKind::Squeezed => "squeezed",
            FamilyKind::Coherent => "coherent",
            FamilyKind::Thermal => "thermal",
            FamilyKind::Random => "random",
        }
    }

    fn required(self) -> &'static [Param] {
        match self {
            FamilyKind::Fock => &[Param::P],
            FamilyKind::Cat | FamilyKind::Coherent => &[Param::Alpha],
            FamilyKind::BellPhi | FamilyKind::BellPsi => &[Param::Phi],
            FamilyKind::Squeezed => &[Param::R],
            FamilyKind::Thermal => &[Param::NT],
            FamilyKind::Random => &[Param::D],
        }
    }

    fn optional(self) -> &'static [Param] {
        match self {
            FamilyKind::Cat | FamilyKind::Coherent => &[Param::Phi],
            _ => &[],
        }
    }
}

/// Parameter axes in sweep order; the last varies fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    P,
    Alpha,
    Phi,
    R,
    NT,
    D,
    Cutoff,
    Eta,
    Transmissivity,
    Efficiency,
}

impl Param {
    pub const ALL: [Param; 10] = [
        Param::P,
        Param::Alpha,
        Param::Phi,
        Param::R,
        Param::NT,
        Param::D,
        Param::Cutoff,
        Param::Eta,
        Param::Transmissivity,
        Param::Efficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::Alpha => "alpha",
            Param::Phi => "phi",
            Param::R => "r",
            Param::NT => "n_t",
            Param::D => "d",
            Param::Cutoff => "cutoff",
            Param::Eta => "eta",
            Param::Transmissivity => "transmissivity",
            Param::Efficiency => "efficiency",
        }
    }

    fn flag(self) -> &'static str {
        match self {
            Param::NT => "n-t",
            p => p.name(),
        }
    }

    fn integral(self) -> bool {
        matches!(self, Param::P | Param::D | Param::Cutoff)
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct StateArgs {
    /// Catalog family.
    #[arg(long, value_enum, conflicts_with = "state")]
    pub family: Option<FamilyKind>,
    /// State file to load instead of a catalog family.
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// Photon number of a Fock state.
    #[arg(long)]
    pub p: Option<String>,
    /// Cat or coherent amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Superposition angle (cat, bell-phi, bell-psi) or coherent phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Squeezing parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<String>,
    /// Thermal occupation.
    #[arg(long = "n-t")]
    pub n_t: Option<String>,
    /// Largest photon number of a random state.
    #[arg(long)]
    pub d: Option<String>,
    /// Per-mode Fock cutoff.
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Loss channel survival probability.
    #[arg(long)]
    pub eta: Option<String>,
    /// IPS beam-splitter transmissivity.
    #[arg(long)]
    pub transmissivity: Option<String>,
    /// IPS detector efficiency (default 1 when --transmissivity is given).
    #[arg(long)]
    pub efficiency: Option<String>,
    /// Seed of the random family.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// One fully specified evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub values: BTreeMap<Param, f64>,
}

impl Point {
    fn get(&self, p: Param) -> Option<f64> {
        self.values.get(&p).copied()
    }

    fn count(&self, p: Param) -> Option<usize> {
        self.get(p).map(|x| x as usize)
    }
}

pub enum Source {
    Catalog(FamilyKind),
    File(Box<StateFile>, FockState),
}

pub struct Plan {
    pub source: Source,
    pub seed: u64,
    /// Axes given on the command line with their values.
    pub axes: Vec<(Param, Vec<f64>)>,
}

impl StateArgs {
    fn raw(&self, p: Param) -> Option<&str> {
        match p {
            Param::P => self.p.as_deref(),
            Param::Alpha => self.alpha.as_deref(),
            Param::Phi => self.phi.as_deref(),
            Param::R => self.r.as_deref(),
            Param::NT => self.n_t.as_deref(),
            Param::D => self.d.as_deref(),
            Param::Cutoff => self.cutoff.as_deref(),
            Param::Eta => self.eta.as_deref(),
            Param::Transmissivity => self.transmissivity.as_deref(),
            Param::Efficiency => self.efficiency.as_deref(),
        }
    }

    pub fn plan(&self) -> CliResult<Plan> {
        let source = match (&self.family, &self.state) {
            (Some(f), None) => Source::Catalog(*f),
            (None, Some(path)) => {
                let (file, state) = StateFile::load(path)?;
                Source::File(Box::new(file), state)
            }
            _ => return Err(CliError::usage("give exactly one of --family or --state")),
        };
        let allowed: Vec<Param> = match &source {
            Source::Catalog(f) => {
                for &p in f.required() {
                    if self.raw(p).is_none() {
                        return Err(CliError::usage(format!("--family {} needs --{}", f.name(), p.flag())));
                    }
                }
                [f.required(), f.optional(), &[Param::Cutoff]].concat()
            }
            Source::File(..) => Vec::new(),
        };
        if self.raw(Param::Efficiency).is_some() && self.raw(Param::Transmissivity).is_none() {
            return Err(CliError::usage("--efficiency needs --transmissivity"));
        }
        if self.raw(Param::Eta).is_some() && self.raw(Param::Transmissivity).is_some() {
            return Err(CliError::usage("--eta and --transmissivity select different channels"));
        }
        let channel = [Param::Eta, Param::Transmissivity, Param::Efficiency];
        let mut axes = Vec::new();
        for p in Param::ALL {
            let Some(text) = self.raw(p) else { continue };
            if !allowed.contains(&p) && !channel.contains(&p) {
                let owner = match &source {
                    Source::Catalog(f) => format!("--family {}", f.name()),
                    Source::File(..) => "--state".into(),
                };
                return Err(CliError::usage(format!("--{} does not apply to {owner}", p.flag())));
            }
            let values = if p.integral() {
                parse_counts(p.flag(), text)?.into_iter().map(|n| n as f64).collect()
            } else {
                parse_range(p.flag(), text)?
            };
            axes.push((p, values));
        }
        Ok(Plan { source, seed: self.seed, axes })
    }
}

impl Plan {
    /// Cartesian product of the axes, last axis fastest.
    pub fn points(&self) -> Vec<Point> {
        let mut out = vec![Point { values: BTreeMap::new() }];
        for (p, values) in &self.axes {
            out = out
                .iter()
                .flat_map(|pt| {
                    values.iter().map(move |&v| {
                        let mut next = pt.clone();
                        next.values.insert(*p, v);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// The single point of a plan whose axes all hold one value.
    pub fn single(&self) -> CliResult<Point> {
        if let Some((p, v)) = self.axes.iter().find(|(_, v)| v.len() != 1) {
            return Err(CliError::usage(format!("--{} must be a single value here; got {} values", p.flag(), v.len())));
        }
        Ok(self.points().remove(0))
    }

    pub fn family_name(&self) -> String {
        match &self.source {
            Source::Catalog(f) => f.name().into(),
            Source::File(file, _) => file.metadata.as_ref().and_then(|m| m.family.clone()).unwrap_or_else(|| "file".into()),
        }
    }

    pub fn has_ips(&self) -> bool {
        self.axes.iter().any(|(p, _)| *p == Param::Transmissivity)
    }

    fn catalog_spec(&self, kind: FamilyKind, pt: &Point) -> CatalogSpec {
        let phi = pt.get(Param::Phi).unwrap_or(0.0);
        let family = match kind {
            FamilyKind::Fock => Family::Fock { p: pt.count(Param::P).unwrap() },
            FamilyKind::Cat => Family::Cat { alpha: pt.get(Param::Alpha).unwrap(), phi },
            FamilyKind::BellPhi => Family::BellPhi { phi },
            FamilyKind::BellPsi => Family::BellPsi { phi },
            FamilyKind::Squeezed => Family::SqueezedVacuum { r: pt.get(Param::R).unwrap() },
            FamilyKind::Coherent => Family::Coherent { alpha: C64::from_polar(pt.get(Param::Alpha).unwrap(), phi) },
            FamilyKind::Thermal => Family::Thermal { n_t: pt.get(Param::NT).unwrap() },
            FamilyKind::Random => Family::Random { d: pt.count(Param::D).unwrap(), seed: self.seed },
        };
        let spec = CatalogSpec::new(family);
        match pt.count(Param::Cutoff) {
            Some(c) => spec.with_cutoff(c),
            None => spec,
        }
    }

    pub fn channel(&self, pt: &Point) -> ChannelParams {
        if let Some(eta) = pt.get(Param::Eta) {
            ChannelParams::Loss { eta }
        } else if let Some(t) = pt.get(Param::Transmissivity) {
            ChannelParams::Ips { transmissivity: t, efficiency: pt.get(Param::Efficiency).unwrap_or(1.0) }
        } else {
            ChannelParams::Identity
        }
    }

    /// The state at `pt` after its channel, with the IPS click probability.
    pub fn state(&self, pt: &Point) -> CliResult<(FockState, Option<f64>)> {
        let input = match &self.source {
            Source::Catalog(kind) => self.catalog_spec(*kind, pt).build()?,
            Source::File(_, state) => state.clone(),
        };
        Ok(match self.channel(pt) {
            ChannelParams::Identity => (input, None),
            ChannelParams::Ips { transmissivity, efficiency } => {
                let (out, prob) = channels::ips_apply(&input, transmissivity, efficiency)?;
                (out, Some(prob))
            }
            ch => (ch.apply(&input)?, None),
        })
    }

    pub fn evaluate(&self, pt: &Point) -> CliResult<Record> {
        let (state, click) = self.state(pt)?;
        let result = non_gaussianity(&state)?;
        Ok(Record { point: pt.clone(), cutoffs: state.cutoffs().to_vec(), result, click })
    }

    pub fn metadata(&self, pt: &Point) -> Metadata {
        let mut parameters: BTreeMap<String, f64> = pt.values.iter().map(|(p, v)| (p.name().to_string(), *v)).collect();
        let seed = match &self.source {
            Source::Catalog(FamilyKind::Random) => Some(self.seed),
            Source::File(file, _) => {
                if let Some(m) = &file.metadata {
                    for (k, v) in &m.parameters {
                        parameters.entry(k.clone()).or_insert(*v);
                    }
                }
                file.metadata.as_ref().and_then(|m| m.seed)
            }
            _ => None,
        };
        Metadata { family: Some(self.family_name()), parameters, seed }
    }
}

pub struct Record {
    pub point: Point,
    pub cutoffs: Vec<usize>,
    pub result: NonGaussianityResult,
    pub click: Option<f64>,
}

impl Record {
    pub fn flags(&self) -> String {
        let mut labels: Vec<&str> = self.result.flags.labels();
        if self.result.above_half {
            labels.push("above-half");
        }
        labels.join(";")
    }

    pub fn cutoff_text(&self) -> String {
        self.cutoffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("x")
    }

    pub fn summary_cells(&self) -> Vec<Cell> {
        let r = &self.result;
        vec![r.delta.into(), r.purity_rho.into(), r.purity_tau.into(), r.overlap.into(), self.cutoff_text().into(), self.flags().into()]
    }

    pub fn to_json(&self, family: &str) -> Value {
        let r = &self.result;
        let params: serde_json::Map<String, Value> =
            self.point.values.iter().map(|(p, v)| (p.name().to_string(), json!(v))).collect();
        let mut out = json!({
            "family": family,
            "parameters": params,
            "cutoffs": self.cutoffs,
            "delta": r.delta,
            "purity_rho": r.purity_rho,
            "purity_tau": r.purity_tau,
            "overlap": r.overlap,
            "flags": self.flags().split(';').filter(|s| !s.is_empty()).collect::<Vec<_>>(),
        });
        if let Some(p) = self.click {
            out["click_probability"] = json!(p);
        }
        out
    }
}

pub const SUMMARY_COLUMNS: [&str; 6] = ["delta", "purity_rho", "purity_tau", "overlap", "cutoffs", "flags"];
