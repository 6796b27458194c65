use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use super::ExperimentError;
use crate::cocycle::MatrixCocycle;
use crate::linalg::Matrix;
use crate::symbolic::{ShiftSpace, Word};

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    /// Another TOML file holding the remaining fields.
    pub path: Option<String>,
    /// `"full"` (with `alphabet`) or `"golden_mean"`.
    pub preset: Option<String>,
    pub alphabet: Option<usize>,
    pub transition: Option<Vec<Vec<u8>>>,
    pub decay: Option<f64>,
}

/// Rows of one generator, with source positions for error messages.
pub type SpannedMatrix = Spanned<Vec<Spanned<Vec<f64>>>>;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    pub path: Option<String>,
    pub dimension: Option<usize>,
    /// One matrix per symbol, as a list of rows.
    pub generators: Option<Vec<SpannedMatrix>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrregularConfig {
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub levels: usize,
    pub margin: Option<f64>,
    /// Cylinder window word; defaults to the first symbol of the first measure.
    pub window: Option<String>,
    /// Coordinate of the first window symbol; defaults to centring.
    pub window_lo: Option<i64>,
    /// `n` in `O_n`.
    pub min_time: u64,
    pub pesin_level: Option<f64>,
    /// Points of the running-average plot.
    pub plot_points: usize,
}

impl Default for IrregularConfig {
    fn default() -> Self {
        Self {
            tau: None,
            epsilon: None,
            levels: 3,
            margin: None,
            window: None,
            window_lo: None,
            min_time: 0,
            pesin_level: None,
            plot_points: 200,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub window: usize,
    pub min_time: u64,
    pub levels: usize,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            window: 3,
            min_time: 10,
            levels: 1,
            tau: None,
            epsilon: None,
        }
    }
}

/// One shadowing pair for the cone and norm-estimate instances: `y`
/// follows the periodic orbit of `word` on `[-5, keep]`, then `other`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub word: String,
    pub other: String,
    pub keep: i64,
    pub steps: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    /// Periodic words whose splittings are checked; defaults to `measures`.
    pub words: Option<Vec<String>>,
    pub epsilon: f64,
    pub n_min: i64,
    pub n_max: i64,
    pub tolerance: f64,
    pub samples: usize,
    pub alpha: f64,
    pub eta: Option<f64>,
    pub instances: Vec<InstanceConfig>,
    /// Run the truncated-window and corrupted-Gram negative controls.
    pub controls: bool,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            words: None,
            epsilon: 0.1,
            n_min: -20,
            n_max: 20,
            tolerance: 1e-6,
            samples: 16,
            alpha: 1.0,
            eta: None,
            instances: Vec::new(),
            controls: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub max_block: u64,
    pub max_window: usize,
    /// Steps searched by the `O_n` membership check.
    pub horizon: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_block: 1 << 50,
            max_window: 12,
            horizon: 100_000,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub space: SpaceConfig,
    pub cocycle: CocycleConfig,
    #[serde(default)]
    pub measures: Vec<Spanned<String>>,
    #[serde(default)]
    pub irregular: IrregularConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub levels: Option<usize>,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub window: Option<usize>,
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
    /// `key=value` pairs for [`Caps`].
    pub caps: Vec<(String, String)>,
}

/// A parsed config with its space, cocycle and measures resolved.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub space: ShiftSpace,
    pub cocycle: MatrixCocycle,
    pub measures: Vec<Word>,
    pub out_dir: PathBuf,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn config_error(path: &Path, line: Option<usize>, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path, src: &str) -> Result<T, ExperimentError> {
    toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| line_of(src, s.start));
        config_error(path, line, e.message().trim().to_string())
    })
}

fn read(path: &Path) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path).map_err(|e| config_error(path, None, format!("cannot read: {e}")))
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    base.parent().unwrap_or(Path::new(".")).join(rel)
}

fn build_space(path: &Path, cfg: &SpaceConfig) -> Result<ShiftSpace, ExperimentError> {
    let err = |m: String| config_error(path, None, m);
    let space = match (cfg.preset.as_deref(), &cfg.transition) {
        (Some(_), Some(_)) => return Err(err("space: give either preset or transition, not both".into())),
        (Some("full"), None) => {
            let k = cfg.alphabet.ok_or_else(|| err("space: preset \"full\" needs alphabet".into()))?;
            if k == 0 {
                return Err(err("space: alphabet must be positive".into()));
            }
            ShiftSpace::full_shift(k)
        }
        (Some("golden_mean"), None) => ShiftSpace::golden_mean(),
        (Some(other), None) => return Err(err(format!("space: unknown preset {other:?}"))),
        (None, Some(t)) => ShiftSpace::new(t.clone(), 1.0).map_err(|e| err(format!("space: {e}")))?,
        (None, None) => return Err(err("space: needs preset, transition or path".into())),
    };
    match cfg.decay {
        Some(d) => space.with_decay(d).map_err(|e| err(format!("space: {e}"))),
        None => Ok(space),
    }
}

fn build_cocycle(path: &Path, src: &str, cfg: &CocycleConfig) -> Result<MatrixCocycle, ExperimentError> {
    let gens = cfg
        .generators
        .as_ref()
        .ok_or_else(|| config_error(path, None, "cocycle: needs generators or path"))?;
    let first = gens
        .first()
        .ok_or_else(|| config_error(path, None, "cocycle: generators is empty"))?;
    let dim = cfg.dimension.unwrap_or(first.get_ref().len());
    let mut mats = Vec::with_capacity(gens.len());
    for (s, g) in gens.iter().enumerate() {
        let rows = g.get_ref();
        if rows.len() != dim {
            return Err(config_error(
                path,
                Some(line_of(src, g.span().start)),
                format!("cocycle: generator {s} has {} rows, expected {dim}", rows.len()),
            ));
        }
        let mut flat = Vec::with_capacity(dim * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.get_ref().len() != dim {
                return Err(config_error(
                    path,
                    Some(line_of(src, row.span().start)),
                    format!(
                        "cocycle: generator {s} row {r} has {} entries, expected {dim}",
                        row.get_ref().len()
                    ),
                ));
            }
            if let Some(c) = row.get_ref().iter().position(|v| !v.is_finite()) {
                return Err(config_error(
                    path,
                    Some(line_of(src, row.span().start)),
                    format!("cocycle: generator {s} entry ({r}, {c}) is not finite"),
                ));
            }
            flat.extend_from_slice(row.get_ref());
        }
        mats.push(Matrix::from_row_slice(dim, dim, &flat));
    }
    MatrixCocycle::new(mats).map_err(|e| config_error(path, Some(line_of(src, first.span().start)), format!("cocycle: {e}")))
}

fn parse_word(path: &Path, src: &str, w: &Spanned<String>, space: &ShiftSpace) -> Result<Word, ExperimentError> {
    let line = Some(line_of(src, w.span().start));
    let word: Word = w
        .get_ref()
        .parse()
        .map_err(|e| config_error(path, line, format!("measure {:?}: {e}", w.get_ref())))?;
    space
        .check_cyclic_word(&word)
        .map_err(|e| config_error(path, line, format!("measure {:?}: {e}", w.get_ref())))?;
    Ok(word)
}

fn apply_caps(path: &Path, caps: &mut Caps, pairs: &[(String, String)]) -> Result<(), ExperimentError> {
    for (k, v) in pairs {
        let bad = |_| config_error(path, None, format!("--caps {k}={v}: not a non-negative integer"));
        match k.as_str() {
            "max_block" => caps.max_block = v.parse().map_err(bad)?,
            "max_window" => caps.max_window = v.parse().map_err(bad)?,
            "horizon" => caps.horizon = v.parse().map_err(bad)?,
            _ => return Err(config_error(path, None, format!("--caps: unknown cap {k:?}"))),
        }
    }
    Ok(())
}

fn check_parameters(path: &Path, c: &ExperimentConfig) -> Result<(), ExperimentError> {
    let err = |m: String| Err(config_error(path, None, m));
    for (name, tau, eps) in [
        ("irregular", c.irregular.tau, c.irregular.epsilon),
        ("scan", c.scan.tau, c.scan.epsilon),
    ] {
        if let Some(t) = tau {
            if !(t > 0.0) {
                return err(format!("{name}.tau must be positive, got {t}"));
            }
            if let Some(e) = eps {
                if !(e > 0.0 && e < t / 2.0) {
                    return err(format!("{name}.epsilon must lie in (0, tau/2), got {e} with tau {t}"));
                }
            }
        }
        if let Some(e) = eps {
            if !(e > 0.0) {
                return err(format!("{name}.epsilon must be positive, got {e}"));
            }
        }
    }
    if !(c.bounds.epsilon > 0.0) {
        return err(format!("bounds.epsilon must be positive, got {}", c.bounds.epsilon));
    }
    if c.bounds.n_min > c.bounds.n_max {
        return err("bounds.n_min exceeds bounds.n_max".into());
    }
    Ok(())
}

impl Experiment {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, ExperimentError> {
        let src = read(path)?;
        Self::from_str(path, &src, overrides)
    }

    /// Parses `src` as if read from `path` (used for relative includes and
    /// error messages).
    pub fn from_str(path: &Path, src: &str, overrides: &Overrides) -> Result<Self, ExperimentError> {
        let mut config: ExperimentConfig = parse_toml(path, src)?;

        let space = match &config.space.path {
            Some(rel) => {
                let p = resolve(path, rel);
                let s: SpaceConfig = parse_toml(&p, &read(&p)?)?;
                build_space(&p, &s)?
            }
            None => build_space(path, &config.space)?,
        };
        let cocycle = match &config.cocycle.path {
            Some(rel) => {
                let p = resolve(path, rel);
                let text = read(&p)?;
                let c: CocycleConfig = parse_toml(&p, &text)?;
                build_cocycle(&p, &text, &c)?
            }
            None => build_cocycle(path, src, &config.cocycle)?,
        };
        if cocycle.alphabet_size() != space.alphabet_size() {
            return Err(config_error(
                path,
                None,
                format!(
                    "cocycle has {} generators but the space has {} symbols",
                    cocycle.alphabet_size(),
                    space.alphabet_size()
                ),
            ));
        }
        let measures = config
            .measures
            .iter()
            .map(|w| parse_word(path, src, w, &space))
            .collect::<Result<Vec<_>, _>>()?;

        if let Some(k) = overrides.levels {
            config.irregular.levels = k;
        }
        if let Some(t) = overrides.tau {
            config.irregular.tau = Some(t);
            config.scan.tau = Some(t);
        }
        if let Some(e) = overrides.epsilon {
            config.irregular.epsilon = Some(e);
            config.scan.epsilon = Some(e);
            config.bounds.epsilon = e;
        }
        if let Some(w) = overrides.window {
            config.scan.window = w;
        }
        if let Some(h) = overrides.horizon {
            config.caps.horizon = h;
        }
        if let Some(s) = overrides.seed {
            config.seed = s;
        }
        apply_caps(path, &mut config.caps, &overrides.caps)?;
        check_parameters(path, &config)?;

        let out_dir = overrides
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.output.dir));
        Ok(Self {
            config,
            space,
            cocycle,
            measures,
            out_dir,
        })
    }

    pub fn word(&self, w: &str) -> Result<Word, ExperimentError> {
        let word: Word = w
            .parse()
            .map_err(|e| config_error(Path::new("<config>"), None, format!("word {w:?}: {e}")))?;
        self.space
            .check_word(&word)
            .map_err(|e| config_error(Path::new("<config>"), None, format!("word {w:?}: {e}")))?;
        Ok(word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIAG: &str = r#"
seed = 3
measures = ["0", "1"]

[space]
preset = "full"
alphabet = 2

[cocycle]
generators = [
  [[2.0, 0.0], [0.0, 0.5]],
  [[1.0, 0.0], [0.0, 1.0]],
]
"#;

    fn load(src: &str) -> Result<Experiment, ExperimentError> {
        Experiment::from_str(Path::new("test.toml"), src, &Overrides::default())
    }

    #[test]
    fn parses_the_diagonal_example() {
        let e = load(DIAG).unwrap();
        assert_eq!(e.measures.len(), 2);
        assert_eq!(e.cocycle.dim(), 2);
        assert_eq!(e.config.seed, 3);
        assert_eq!(e.config.irregular.levels, 3);
    }

    #[test]
    fn short_row_names_the_entry_and_line() {
        let bad = DIAG.replace("[[1.0, 0.0], [0.0, 1.0]]", "[[1.0, 0.0], [0.0]]");
        let err = load(&bad).unwrap_err();
        let ExperimentError::Config { line, message, .. } = err else { panic!() };
        assert_eq!(line, Some(12));
        assert!(message.contains("generator 1 row 1"), "{message}");
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let bad = DIAG.replace("alphabet = 2", "alphabet = ");
        let ExperimentError::Config { line, .. } = load(&bad).unwrap_err() else { panic!() };
        assert_eq!(line, Some(7));
    }

    #[test]
    fn illegal_measure_is_refused() {
        let src = DIAG
            .replace("preset = \"full\"\nalphabet = 2", "preset = \"golden_mean\"")
            .replace("[\"0\", \"1\"]", "[\"0\", \"11\"]");
        let ExperimentError::Config { line, message, .. } = load(&src).unwrap_err() else { panic!() };
        assert_eq!(line, Some(3));
        assert!(message.contains("11"));
    }

    #[test]
    fn epsilon_must_be_below_half_tau() {
        let src = format!("{DIAG}\n[irregular]\ntau = 0.05\nepsilon = 0.03\n");
        assert!(matches!(load(&src), Err(ExperimentError::Config { .. })));
    }

    #[test]
    fn overrides_and_caps() {
        let o = Overrides {
            levels: Some(5),
            caps: vec![("max_window".into(), "4".into())],
            ..Overrides::default()
        };
        let e = Experiment::from_str(Path::new("t.toml"), DIAG, &o).unwrap();
        assert_eq!(e.config.irregular.levels, 5);
        assert_eq!(e.config.caps.max_window, 4);
        let o = Overrides {
            caps: vec![("speed".into(), "1".into())],
            ..Overrides::default()
        };
        assert!(Experiment::from_str(Path::new("t.toml"), DIAG, &o).is_err());
    }
}
