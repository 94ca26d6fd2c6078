//! Scenario descriptions and the flat `key = value` config format.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scheme::{Order, TraceStepping, DEFAULT_VISCOSITY_CELLS, DEFAULT_VISCOSITY_NU};

/// Self-convergence reference mesh.
pub const DEFAULT_N_REF: usize = 2399;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    WaveGeneration,
    DecayLinear,
    DecayNonlinear,
    FixedLinear,
    FixedNonlinear,
    FreeFloating,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::WaveGeneration,
        ScenarioKind::DecayLinear,
        ScenarioKind::DecayNonlinear,
        ScenarioKind::FixedLinear,
        ScenarioKind::FixedNonlinear,
        ScenarioKind::FreeFloating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::WaveGeneration => "wave_generation",
            ScenarioKind::DecayLinear => "decay_linear",
            ScenarioKind::DecayNonlinear => "decay_nonlinear",
            ScenarioKind::FixedLinear => "fixed_linear",
            ScenarioKind::FixedNonlinear => "fixed_nonlinear",
            ScenarioKind::FreeFloating => "free_floating",
        }
    }

    /// Observables whose errors are reported.
    pub fn observables(self) -> &'static [Observable] {
        match self {
            ScenarioKind::WaveGeneration => &[Observable::Zeta, Observable::Q],
            ScenarioKind::DecayLinear | ScenarioKind::DecayNonlinear => &[Observable::Delta],
            ScenarioKind::FixedLinear | ScenarioKind::FixedNonlinear => &[Observable::QiAvg],
            ScenarioKind::FreeFloating => &[Observable::Delta, Observable::QiAvg, Observable::ZuPlus],
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario kind '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    /// ζ field at the final time.
    Zeta,
    /// q field at the final time.
    Q,
    Delta,
    QiAvg,
    ZuPlus,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Zeta => "zeta",
            Observable::Q => "q",
            Observable::Delta => "delta",
            Observable::QiAvg => "qi_avg",
            Observable::ZuPlus => "zu_plus",
        }
    }

    pub fn is_field(self) -> bool {
        matches!(self, Observable::Zeta | Observable::Q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    Oracle,
    SelfConvergence { n_ref: usize },
}

/// How N maps to the cell width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshRule {
    /// Δx = (L − ℓ)/(N + 1).
    Cells,
    /// Δx = length/N on a half-line of length L − ℓ, which must hold a whole
    /// number of cells.
    Spacing { length: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Forcing {
    /// Fluid at rest.
    None,
    /// Release from δ₀ in still water.
    Release { delta0: f64 },
    /// Solitary wave of amplitude `zeta_max` with its crest at `crest`.
    Soliton { zeta_max: f64, crest: f64 },
    /// Linear periodic family; ζ^s and q^c follow from the constraints.
    Periodic { k: f64, zeta_c_plus: f64, zeta_c_minus: f64, q_s_plus: f64, q_s_minus: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub epsilon: f64,
    /// μ = 3κ².
    pub mu: f64,
    pub ell: f64,
    /// Constant equilibrium depth under the object.
    pub h_eq: f64,
    pub l_outer: f64,
    pub mesh: MeshRule,
    pub order: Order,
    pub dt_ratio: f64,
    pub viscosity: Option<bool>,
    pub viscosity_nu: f64,
    pub viscosity_cells: usize,
    pub trace_stepping: TraceStepping,
    pub n_list: Vec<usize>,
    /// Runs stop at the last step not beyond this time.
    pub t_final: f64,
    pub forcing: Forcing,
    pub reference: Reference,
}

impl ScenarioSpec {
    /// Standard setups of the six experiments. `mu` is 3κ²; the default N
    /// lists depend on the scheme order.
    pub fn preset(kind: ScenarioKind, mu: f64, order: Order) -> Self {
        let mc = order == Order::Second;
        let base = ScenarioSpec {
            kind,
            epsilon: 0.3,
            mu,
            ell: 4.0,
            h_eq: 0.7,
            l_outer: 30.0,
            mesh: MeshRule::Cells,
            order,
            dt_ratio: 0.7,
            viscosity: None,
            viscosity_nu: DEFAULT_VISCOSITY_NU,
            viscosity_cells: DEFAULT_VISCOSITY_CELLS,
            trace_stepping: TraceStepping::Exponential,
            n_list: vec![],
            t_final: 20.0,
            forcing: Forcing::None,
            reference: Reference::SelfConvergence { n_ref: DEFAULT_N_REF },
        };
        let self_ref = |v: &[usize]| v.iter().map(|n| n - 1).collect::<Vec<_>>();
        match kind {
            ScenarioKind::WaveGeneration => ScenarioSpec {
                ell: 1.0,
                h_eq: 0.5,
                l_outer: 46.0,
                mesh: MeshRule::Spacing { length: 6.0 },
                dt_ratio: 0.8,
                n_list: vec![200, 240, 300, 400],
                forcing: Forcing::Soliton { zeta_max: 1.0, crest: -2.0 },
                reference: Reference::Oracle,
                ..base
            },
            ScenarioKind::DecayLinear => ScenarioSpec {
                epsilon: 0.0,
                dt_ratio: 0.9,
                t_final: 15.0,
                n_list: if mc { vec![60, 120, 240, 320] } else { vec![300, 400, 500, 600] },
                forcing: Forcing::Release { delta0: 1.0 },
                reference: Reference::Oracle,
                ..base
            },
            ScenarioKind::DecayNonlinear => ScenarioSpec {
                t_final: 15.0,
                n_list: if mc { self_ref(&[120, 160, 200]) } else { self_ref(&[160, 200, 240, 300, 400]) },
                forcing: Forcing::Release { delta0: 0.5 },
                ..base
            },
            ScenarioKind::FixedLinear => ScenarioSpec {
                epsilon: 0.0,
                ell: 1.0,
                h_eq: 0.8,
                l_outer: 10.0,
                dt_ratio: 0.9,
                t_final: 1.0,
                n_list: vec![200, 240, 300, 360, 400],
                forcing: Forcing::Periodic { k: 2.0, zeta_c_plus: 0.1, zeta_c_minus: 0.05, q_s_plus: 0.08, q_s_minus: 0.02 },
                reference: Reference::Oracle,
                ..base
            },
            ScenarioKind::FixedNonlinear => ScenarioSpec {
                n_list: if mc { self_ref(&[100, 120, 160]) } else { self_ref(&[160, 200, 240, 300, 400]) },
                forcing: Forcing::Soliton { zeta_max: 0.2, crest: -15.0 },
                ..base
            },
            ScenarioKind::FreeFloating => ScenarioSpec {
                n_list: if !mc {
                    self_ref(&[240, 300, 400])
                } else if mu < 0.2 {
                    self_ref(&[120, 160, 200, 240])
                } else {
                    self_ref(&[80, 100, 120, 160])
                },
                forcing: Forcing::Soliton { zeta_max: 0.2, crest: -15.0 },
                ..base
            },
        }
    }

    pub fn kappa(&self) -> f64 {
        (self.mu / 3.0).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list is empty".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_list must be strictly increasing".into()));
        }
        if !(self.t_final >= 0.0) || !(self.dt_ratio > 0.0 && self.dt_ratio <= 1.0) {
            return Err(Error::Config("t_final must be >= 0 and dt_ratio in (0, 1]".into()));
        }
        if let Reference::SelfConvergence { n_ref } = self.reference {
            if self.mesh != MeshRule::Cells {
                return Err(Error::Config("self-convergence needs mesh = cells".into()));
            }
            for &n in &self.n_list {
                if n >= n_ref || (n_ref + 1) % (n + 1) != 0 {
                    return Err(Error::Config(format!(
                        "coarse mesh N = {n} does not nest in N_ref = {n_ref} (N_ref + 1 must be a multiple of N + 1)"
                    )));
                }
            }
        }
        let oracle_ok = match self.kind {
            ScenarioKind::WaveGeneration => matches!(self.forcing, Forcing::Soliton { .. } | Forcing::None),
            ScenarioKind::DecayLinear => self.epsilon == 0.0 && matches!(self.forcing, Forcing::Release { .. }),
            ScenarioKind::FixedLinear => self.epsilon == 0.0 && matches!(self.forcing, Forcing::Periodic { .. }),
            _ => false,
        };
        if self.reference == Reference::Oracle && !oracle_ok {
            return Err(Error::Config(format!("no oracle for {} with this forcing", self.kind.name())));
        }
        Ok(())
    }

    /// Parses the flat config format: one `key = value` per line, `#`
    /// comments. `kind` is required and selects the preset the other keys
    /// override.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_scheme(text, None)
    }

    /// Like [`ScenarioSpec::parse`], with `scheme` (if given) replacing the
    /// file's `scheme` key before the preset is chosen.
    pub fn parse_with_scheme(text: &str, scheme: Option<Order>) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{}'", i + 1, k.trim())));
            }
        }
        let kind: ScenarioKind = kv.remove("kind").ok_or_else(|| Error::Config("missing key 'kind'".into()))?.parse()?;
        let order = match kv.remove("scheme").as_deref() {
            None | Some("mc") => Order::Second,
            Some("lf") => Order::First,
            Some(s) => return Err(Error::Config(format!("scheme must be lf or mc, got '{s}'"))),
        };
        let order = scheme.unwrap_or(order);
        let mu = take(&mut kv, "mu")?.unwrap_or(0.3);
        let mut spec = ScenarioSpec::preset(kind, mu, order);
        if let Some(v) = take(&mut kv, "epsilon")? {
            spec.epsilon = v;
        }
        if let Some(v) = take(&mut kv, "ell")? {
            spec.ell = v;
        }
        if let Some(v) = kv.remove("h_eq") {
            let c = v
                .strip_prefix("constant:")
                .ok_or_else(|| Error::Config(format!("h_eq must be constant:<value>, got '{v}'")))?;
            spec.h_eq = num(c, "h_eq")?;
        }
        if let Some(v) = take(&mut kv, "l_outer")? {
            spec.l_outer = v;
        }
        if let Some(v) = kv.remove("mesh") {
            spec.mesh = match v.as_str() {
                "cells" => MeshRule::Cells,
                s => match s.strip_prefix("spacing:") {
                    Some(len) => MeshRule::Spacing { length: num(len, "mesh")? },
                    None => return Err(Error::Config(format!("mesh must be cells or spacing:<len>, got '{s}'"))),
                },
            };
        }
        if let Some(v) = take(&mut kv, "dt_ratio")? {
            spec.dt_ratio = v;
        }
        if let Some(v) = kv.remove("viscosity") {
            spec.viscosity = match v.as_str() {
                "auto" => None,
                "on" => Some(true),
                "off" => Some(false),
                s => return Err(Error::Config(format!("viscosity must be auto, on or off, got '{s}'"))),
            };
        }
        if let Some(v) = take(&mut kv, "viscosity_nu")? {
            spec.viscosity_nu = v;
        }
        if let Some(v) = kv.remove("viscosity_cells") {
            spec.viscosity_cells = v.parse().map_err(|_| Error::Config(format!("bad viscosity_cells '{v}'")))?;
        }
        if let Some(v) = kv.remove("trace_stepping") {
            spec.trace_stepping = match v.as_str() {
                "exponential" => TraceStepping::Exponential,
                "explicit" => TraceStepping::Explicit,
                s => return Err(Error::Config(format!("trace_stepping must be exponential or explicit, got '{s}'"))),
            };
        }
        if let Some(v) = kv.remove("n_list") {
            spec.n_list = v
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Config(format!("bad N '{s}'"))))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = take(&mut kv, "t_final")? {
            spec.t_final = v;
        }
        if let Some(v) = kv.remove("reference") {
            spec.reference = match v.as_str() {
                "oracle" => Reference::Oracle,
                "self" => Reference::SelfConvergence { n_ref: DEFAULT_N_REF },
                s => match s.strip_prefix("self:") {
                    Some(n) => Reference::SelfConvergence {
                        n_ref: n.parse().map_err(|_| Error::Config(format!("bad reference N '{n}'")))?,
                    },
                    None => return Err(Error::Config(format!("reference must be oracle or self[:N], got '{s}'"))),
                },
            };
        }
        spec.forcing = parse_forcing(&mut kv, spec.forcing)?;
        if let Some(k) = kv.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Inverse of [`ScenarioSpec::parse`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("kind", self.kind.name().into());
        put("scheme", if self.order == Order::First { "lf" } else { "mc" }.into());
        put("mu", self.mu.to_string());
        put("epsilon", self.epsilon.to_string());
        put("ell", self.ell.to_string());
        put("h_eq", format!("constant:{}", self.h_eq));
        put("l_outer", self.l_outer.to_string());
        put(
            "mesh",
            match self.mesh {
                MeshRule::Cells => "cells".into(),
                MeshRule::Spacing { length } => format!("spacing:{length}"),
            },
        );
        put("dt_ratio", self.dt_ratio.to_string());
        put(
            "viscosity",
            match self.viscosity {
                None => "auto",
                Some(true) => "on",
                Some(false) => "off",
            }
            .into(),
        );
        put("viscosity_nu", self.viscosity_nu.to_string());
        put("viscosity_cells", self.viscosity_cells.to_string());
        put(
            "trace_stepping",
            match self.trace_stepping {
                TraceStepping::Exponential => "exponential",
                TraceStepping::Explicit => "explicit",
            }
            .into(),
        );
        put("n_list", self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
        put("t_final", self.t_final.to_string());
        put(
            "reference",
            match self.reference {
                Reference::Oracle => "oracle".into(),
                Reference::SelfConvergence { n_ref } => format!("self:{n_ref}"),
            },
        );
        match self.forcing {
            Forcing::None => put("forcing", "none".into()),
            Forcing::Release { delta0 } => {
                put("forcing", "release".into());
                put("delta0", delta0.to_string());
            }
            Forcing::Soliton { zeta_max, crest } => {
                put("forcing", "soliton".into());
                put("zeta_max", zeta_max.to_string());
                put("crest", crest.to_string());
            }
            Forcing::Periodic { k, zeta_c_plus, zeta_c_minus, q_s_plus, q_s_minus } => {
                put("forcing", "periodic".into());
                put("k", k.to_string());
                put("zeta_c_plus", zeta_c_plus.to_string());
                put("zeta_c_minus", zeta_c_minus.to_string());
                put("q_s_plus", q_s_plus.to_string());
                put("q_s_minus", q_s_minus.to_string());
            }
        }
        s
    }
}

fn num(s: &str, key: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Config(format!("bad value for {key}: '{s}'")))
}

fn take(kv: &mut BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    kv.remove(key).map(|v| num(&v, key)).transpose()
}

fn parse_forcing(kv: &mut BTreeMap<String, String>, default: Forcing) -> Result<Forcing> {
    let kind = kv.remove("forcing");
    let mut f = match kind.as_deref() {
        None => default,
        Some("none") => Forcing::None,
        Some("release") => match default {
            Forcing::Release { .. } => default,
            _ => Forcing::Release { delta0: 1.0 },
        },
        Some("soliton") => match default {
            Forcing::Soliton { .. } => default,
            _ => Forcing::Soliton { zeta_max: 0.2, crest: -15.0 },
        },
        Some("periodic") => match default {
            Forcing::Periodic { .. } => default,
            _ => Forcing::Periodic { k: 2.0, zeta_c_plus: 0.1, zeta_c_minus: 0.05, q_s_plus: 0.08, q_s_minus: 0.02 },
        },
        Some(s) => return Err(Error::Config(format!("unknown forcing '{s}'"))),
    };
    match &mut f {
        Forcing::None => {}
        Forcing::Release { delta0 } => {
            if let Some(v) = take(kv, "delta0")? {
                *delta0 = v;
            }
        }
        Forcing::Soliton { zeta_max, crest } => {
            if let Some(v) = take(kv, "zeta_max")? {
                *zeta_max = v;
            }
            if let Some(v) = take(kv, "crest")? {
                *crest = v;
            }
        }
        Forcing::Periodic { k, zeta_c_plus, zeta_c_minus, q_s_plus, q_s_minus } => {
            for (key, slot) in [
                ("k", k),
                ("zeta_c_plus", zeta_c_plus),
                ("zeta_c_minus", zeta_c_minus),
                ("q_s_plus", q_s_plus),
                ("q_s_minus", q_s_minus),
            ] {
                if let Some(v) = take(kv, key)? {
                    *slot = v;
                }
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for kind in ScenarioKind::ALL {
            for order in [Order::First, Order::Second] {
                for mu in [0.1, 0.3] {
                    ScenarioSpec::preset(kind, mu, order).validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn round_trip() {
        for kind in ScenarioKind::ALL {
            let s = ScenarioSpec::preset(kind, 0.1, Order::First);
            assert_eq!(ScenarioSpec::parse(&s.to_config_string()).unwrap(), s);
        }
    }

    #[test]
    fn overrides_and_errors() {
        let s = ScenarioSpec::parse("kind = decay_linear\nscheme = mc # comment\nn_list = 60, 120,240\nh_eq = constant:0.6\n").unwrap();
        assert_eq!(s.n_list, vec![60, 120, 240]);
        assert_eq!(s.h_eq, 0.6);
        assert_eq!(s.order, Order::Second);
        assert!(ScenarioSpec::parse("scheme = mc").is_err());
        assert!(ScenarioSpec::parse("kind = decay_linear\nfoo = 1").is_err());
        assert!(ScenarioSpec::parse("kind = decay_linear\nn_list = 120,60").is_err());
        assert!(ScenarioSpec::parse("kind = decay_linear\nh_eq = 0.7").is_err());
        assert!(ScenarioSpec::parse("kind = decay_nonlinear\nn_list = 100,120").is_err());
        assert!(ScenarioSpec::parse("kind = decay_nonlinear\nreference = oracle").is_err());
        assert!(ScenarioSpec::parse("kind = decay_linear\nkind = decay_linear").is_err());
    }
}
