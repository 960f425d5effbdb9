use anyhow::{bail, Context, Result};
use griduso::eopl::DEFAULT_BIT_GUARD;
use griduso::lab::DEFAULT_VERTEX_GUARD;

pub const GUARD_ENV: &str = "USOLAB_GUARD";

/// Size limits for the exponential parts of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    /// Vertices an oracle or brute-force search may visit.
    pub vertices: u64,
    /// Node bits an exhaustive enumeration may cover.
    pub bits: usize,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            vertices: DEFAULT_VERTEX_GUARD,
            bits: DEFAULT_BIT_GUARD,
        }
    }
}

impl Guards {
    pub fn unlimited() -> Self {
        Guards {
            vertices: u64::MAX,
            bits: 32,
        }
    }

    /// `"4096"` sets the vertex guard; `"4096,20"` sets both.
    pub fn parse(text: &str) -> Result<Guards> {
        let mut parts = text.split(',').map(str::trim);
        let mut g = Guards::default();
        if let Some(v) = parts.next() {
            g.vertices = v.parse().with_context(|| format!("bad vertex guard {v:?}"))?;
        }
        if let Some(b) = parts.next() {
            g.bits = b.parse().with_context(|| format!("bad bit guard {b:?}"))?;
        }
        if parts.next().is_some() {
            bail!("guard takes at most two values");
        }
        Ok(g)
    }

    /// Defaults, then the environment, then `--unsafe`.
    pub fn resolve(env: Option<&str>, unsafe_mode: bool) -> Result<Guards> {
        if unsafe_mode {
            return Ok(Guards::unlimited());
        }
        match env {
            Some(text) if !text.trim().is_empty() => Guards::parse(text),
            _ => Ok(Guards::default()),
        }
    }

    pub fn from_env(unsafe_mode: bool) -> Result<Guards> {
        Guards::resolve(std::env::var(GUARD_ENV).ok().as_deref(), unsafe_mode)
    }
}
