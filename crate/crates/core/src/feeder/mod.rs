//! Single-phase (balanced-equivalent) feeder model and nodal admittance
//! assembly.
//!
//! Node `0` is always the slack bus, i.e. the secondary of the substation
//! transformer. The remaining nodes `1..=N` form the set over which voltages,
//! injections and the linear power-flow model are indexed. Lines use the
//! π-equivalent model: a series impedance plus a total shunt admittance that
//! is split half-and-half between the two terminals.

mod file;

pub use file::{DerEntry, FeederFile, LineEntry, SlackEntry};

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::RegionKind;
use crate::C64;

/// Reciprocal condition number below which `Y` is reported as degenerate.
pub const RCOND_THRESHOLD: f64 = 1e-10;

/// Index of a bus; `0` is reserved for the slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub usize);

impl BusId {
    pub const SLACK: BusId = BusId(0);

    pub fn is_slack(self) -> bool {
        self.0 == 0
    }

    /// Position of this bus in the `N`-dimensional (slack-free) ordering.
    ///
    /// Panics on the slack bus.
    pub fn reduced_index(self) -> usize {
        assert!(!self.is_slack(), "slack bus has no reduced index");
        self.0 - 1
    }
}

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSegment {
    pub from: BusId,
    pub to: BusId,
    /// Series impedance, per unit.
    pub series_impedance: C64,
    /// Total line charging, per unit. Half is placed at each terminal.
    pub shunt_admittance: C64,
}

impl LineSegment {
    pub fn new(from: usize, to: usize, series_impedance: C64) -> Self {
        Self {
            from: BusId(from),
            to: BusId(to),
            series_impedance,
            shunt_admittance: Complex::new(0.0, 0.0),
        }
    }

    pub fn with_shunt(mut self, shunt_admittance: C64) -> Self {
        self.shunt_admittance = shunt_admittance;
        self
    }

    fn key(&self) -> (BusId, BusId) {
        if self.from <= self.to {
            (self.from, self.to)
        } else {
            (self.to, self.from)
        }
    }
}

/// An inverter-interfaced resource connected at a non-slack bus.
#[derive(Debug, Clone, PartialEq)]
pub struct Der {
    pub node: BusId,
    /// Apparent power rating, per unit.
    pub rating: f64,
    pub kind: RegionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeederModel {
    /// Number of non-slack buses `N`.
    pub n_nodes: usize,
    pub lines: Vec<LineSegment>,
    /// Slack phasor `V_0`, per unit.
    pub slack_voltage: C64,
    pub ders: Vec<Der>,
    pub monitored_nodes: Vec<BusId>,
    /// VA base; only used for unit conversion on I/O.
    pub base_power: f64,
}

impl FeederModel {
    pub fn der_nodes(&self) -> Vec<BusId> {
        self.ders.iter().map(|d| d.node).collect()
    }

    pub fn n_ders(&self) -> usize {
        self.ders.len()
    }

    pub fn n_monitored(&self) -> usize {
        self.monitored_nodes.len()
    }

    /// Returns a copy with the non-slack buses relabelled by `perm`, where bus
    /// `n` becomes bus `perm[n - 1]`. `perm` must be a permutation of `1..=N`.
    pub fn relabeled(&self, perm: &[usize]) -> FeederModel {
        assert_eq!(perm.len(), self.n_nodes);
        let map = |b: BusId| {
            if b.is_slack() {
                b
            } else {
                BusId(perm[b.0 - 1])
            }
        };
        FeederModel {
            n_nodes: self.n_nodes,
            lines: self
                .lines
                .iter()
                .map(|l| LineSegment {
                    from: map(l.from),
                    to: map(l.to),
                    ..l.clone()
                })
                .collect(),
            slack_voltage: self.slack_voltage,
            ders: self
                .ders
                .iter()
                .map(|d| Der {
                    node: map(d.node),
                    ..d.clone()
                })
                .collect(),
            monitored_nodes: self.monitored_nodes.iter().map(|&b| map(b)).collect(),
            base_power: self.base_power,
        }
    }
}

/// One violated feeder invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    NoNodes,
    BusOutOfRange { line: usize, bus: BusId },
    SelfLoop { line: usize, bus: BusId },
    ZeroImpedance { line: usize },
    NonFiniteParameter { line: usize },
    DuplicateLine { line: usize, from: BusId, to: BusId },
    Disconnected { unreachable: Vec<BusId> },
    NoDerNodes,
    DerAtSlackOrOutOfRange { bus: BusId },
    DuplicateDer { bus: BusId },
    InvalidRating { bus: BusId, rating: f64 },
    NoMonitoredNodes,
    MonitoredOutOfRange { bus: BusId },
    DuplicateMonitored { bus: BusId },
    InvalidSlackVoltage,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NoNodes => {
                write!(f, "no nodes: feeder must have at least one non-slack bus")
            }
            Diagnostic::BusOutOfRange { line, bus } => {
                write!(f, "bus out of range: line #{line} references bus {bus}")
            }
            Diagnostic::SelfLoop { line, bus } => {
                write!(f, "self loop: line #{line} connects bus {bus} to itself")
            }
            Diagnostic::ZeroImpedance { line } => {
                write!(f, "zero impedance: line #{line} has zero series impedance")
            }
            Diagnostic::NonFiniteParameter { line } => {
                write!(f, "non-finite parameter: line #{line}")
            }
            Diagnostic::DuplicateLine { line, from, to } => {
                write!(f, "duplicate line: line #{line} repeats ({from},{to})")
            }
            Diagnostic::Disconnected { unreachable } => {
                let list: Vec<String> = unreachable.iter().map(|b| b.to_string()).collect();
                write!(
                    f,
                    "disconnected: buses [{}] unreachable from the slack",
                    list.join(",")
                )
            }
            Diagnostic::NoDerNodes => write!(f, "no DER nodes"),
            Diagnostic::DerAtSlackOrOutOfRange { bus } => {
                write!(
                    f,
                    "invalid DER node: bus {bus} is the slack or out of range"
                )
            }
            Diagnostic::DuplicateDer { bus } => write!(f, "duplicate DER node: bus {bus}"),
            Diagnostic::InvalidRating { bus, rating } => {
                write!(f, "invalid DER rating: bus {bus} has rating {rating}")
            }
            Diagnostic::NoMonitoredNodes => write!(f, "no monitored nodes"),
            Diagnostic::MonitoredOutOfRange { bus } => {
                write!(
                    f,
                    "invalid monitored node: bus {bus} is the slack or out of range"
                )
            }
            Diagnostic::DuplicateMonitored { bus } => {
                write!(f, "duplicate monitored node: bus {bus}")
            }
            Diagnostic::InvalidSlackVoltage => write!(f, "invalid slack voltage"),
        }
    }
}

#[derive(Debug, Error)]
pub enum FeederError {
    #[error("invalid feeder: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error(
        "degenerate network: reciprocal condition estimate {rcond:e} below {RCOND_THRESHOLD:e}"
    )]
    Degenerate { rcond: f64 },
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every structural invariant of `feeder`. Empty result means valid.
pub fn validate_feeder(feeder: &FeederModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let n = feeder.n_nodes;
    if n == 0 {
        out.push(Diagnostic::NoNodes);
    }
    let v0 = feeder.slack_voltage;
    if !(v0.re.is_finite() && v0.im.is_finite()) || v0.norm() == 0.0 {
        out.push(Diagnostic::InvalidSlackVoltage);
    }

    let mut seen = HashSet::new();
    for (idx, line) in feeder.lines.iter().enumerate() {
        let mut ok = true;
        for bus in [line.from, line.to] {
            if bus.0 > n {
                out.push(Diagnostic::BusOutOfRange { line: idx, bus });
                ok = false;
            }
        }
        if line.from == line.to {
            out.push(Diagnostic::SelfLoop {
                line: idx,
                bus: line.from,
            });
            ok = false;
        }
        let z = line.series_impedance;
        let y = line.shunt_admittance;
        if ![z.re, z.im, y.re, y.im].iter().all(|v| v.is_finite()) {
            out.push(Diagnostic::NonFiniteParameter { line: idx });
            ok = false;
        } else if z.norm() == 0.0 {
            out.push(Diagnostic::ZeroImpedance { line: idx });
            ok = false;
        }
        if ok && !seen.insert(line.key()) {
            let (from, to) = line.key();
            out.push(Diagnostic::DuplicateLine {
                line: idx,
                from,
                to,
            });
        }
    }

    if n > 0 {
        let unreachable = unreachable_buses(feeder);
        if !unreachable.is_empty() {
            out.push(Diagnostic::Disconnected { unreachable });
        }
    }

    if feeder.ders.is_empty() {
        out.push(Diagnostic::NoDerNodes);
    }
    let mut der_seen = BTreeSet::new();
    for der in &feeder.ders {
        if der.node.is_slack() || der.node.0 > n {
            out.push(Diagnostic::DerAtSlackOrOutOfRange { bus: der.node });
        } else if !der_seen.insert(der.node) {
            out.push(Diagnostic::DuplicateDer { bus: der.node });
        }
        if !(der.rating.is_finite() && der.rating > 0.0) {
            out.push(Diagnostic::InvalidRating {
                bus: der.node,
                rating: der.rating,
            });
        }
    }

    if feeder.monitored_nodes.is_empty() {
        out.push(Diagnostic::NoMonitoredNodes);
    }
    let mut mon_seen = BTreeSet::new();
    for &bus in &feeder.monitored_nodes {
        if bus.is_slack() || bus.0 > n {
            out.push(Diagnostic::MonitoredOutOfRange { bus });
        } else if !mon_seen.insert(bus) {
            out.push(Diagnostic::DuplicateMonitored { bus });
        }
    }
    out
}

fn unreachable_buses(feeder: &FeederModel) -> Vec<BusId> {
    let n = feeder.n_nodes;
    let mut adj = vec![Vec::new(); n + 1];
    for l in &feeder.lines {
        if l.from.0 <= n && l.to.0 <= n && l.from != l.to {
            adj[l.from.0].push(l.to.0);
            adj[l.to.0].push(l.from.0);
        }
    }
    let mut visited = vec![false; n + 1];
    let mut stack = vec![0];
    visited[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                stack.push(w);
            }
        }
    }
    (1..=n).filter(|&b| !visited[b]).map(BusId).collect()
}

/// Partitioned nodal admittance matrix
///
/// ```text
/// [ I_0 ]   [ y00   ybarᵀ ] [ V_0 ]
/// [  i  ] = [ ybar  Y     ] [  v  ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    pub y00: C64,
    pub ybar: DVector<C64>,
    pub y: DMatrix<C64>,
    /// Bus at each row/column of `y`.
    pub ordering: Vec<BusId>,
    /// Reciprocal 1-norm condition number of `y`.
    pub rcond: f64,
}

impl AdmittanceMatrix {
    pub fn n(&self) -> usize {
        self.ybar.len()
    }

    /// Reassembles the full `(N+1)×(N+1)` matrix with the slack first.
    pub fn full(&self) -> DMatrix<C64> {
        let n = self.n();
        let mut full = DMatrix::zeros(n + 1, n + 1);
        full[(0, 0)] = self.y00;
        for i in 0..n {
            full[(0, i + 1)] = self.ybar[i];
            full[(i + 1, 0)] = self.ybar[i];
            for j in 0..n {
                full[(i + 1, j + 1)] = self.y[(i, j)];
            }
        }
        full
    }

    /// `Y⁻¹`; the matrix is known to be well conditioned after construction.
    pub fn y_inverse(&self) -> DMatrix<C64> {
        self.y
            .clone()
            .try_inverse()
            .expect("Y was checked for invertibility at construction")
    }
}

/// Assembles the π-model admittance matrix of `feeder` and checks that the
/// reduced block `Y` is invertible.
pub fn build_admittance(feeder: &FeederModel) -> Result<AdmittanceMatrix, FeederError> {
    let diags = validate_feeder(feeder);
    if !diags.is_empty() {
        return Err(FeederError::Invalid(diags));
    }
    let n = feeder.n_nodes;
    let mut full: DMatrix<C64> = DMatrix::zeros(n + 1, n + 1);
    for line in &feeder.lines {
        let y = line.series_impedance.inv();
        let half_shunt = line.shunt_admittance * 0.5;
        let (a, b) = (line.from.0, line.to.0);
        full[(a, a)] += y + half_shunt;
        full[(b, b)] += y + half_shunt;
        full[(a, b)] -= y;
        full[(b, a)] -= y;
    }

    let y = full.view((1, 1), (n, n)).into_owned();
    let rcond = reciprocal_condition(&y);
    if !(rcond >= RCOND_THRESHOLD) {
        return Err(FeederError::Degenerate { rcond });
    }
    Ok(AdmittanceMatrix {
        y00: full[(0, 0)],
        ybar: full.view((1, 0), (n, 1)).column(0).into_owned(),
        y,
        ordering: (1..=n).map(BusId).collect(),
        rcond,
    })
}

fn norm1(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `1 / (‖A‖₁ ‖A⁻¹‖₁)` from an LU factorization, or `0` when singular.
fn reciprocal_condition(a: &DMatrix<C64>) -> f64 {
    let norm = norm1(a);
    if norm == 0.0 || !norm.is_finite() {
        return 0.0;
    }
    match a.clone().lu().try_inverse() {
        Some(inv) => {
            let inv_norm = norm1(&inv);
            if inv_norm.is_finite() && inv_norm > 0.0 {
                1.0 / (norm * inv_norm)
            } else {
                0.0
            }
        }
        None => 0.0,
    }
}
