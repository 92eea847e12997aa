//! Flat `key = value` configuration for the synthetic generator.
//!
//! ```text
//! # lines starting with '#' are comments
//! n_entities = 400
//! children_min = 20
//! children_max = 60
//! quality_noise_sd = 1.0
//! seed = 42
//! signal = 1.0                      # every attribute
//! attribute.teachers.teacher_edu = BSc:1,MBA:2,MSc:3,PhD:4
//! signal.teacher_edu = 0.5          # one attribute
//! ```
//!
//! Any `attribute.*` key replaces the default attribute set. Keys may appear
//! in any order; per-attribute signals win over the global one.

use std::path::Path;

use grainflow_core::synthgen::{SynthAttribute, SynthConfig};

use crate::{Error, Result};

pub fn parse(text: &str, origin: &Path) -> Result<SynthConfig> {
    let mut cfg = SynthConfig::default();
    let mut attributes: Vec<SynthAttribute> = Vec::new();
    let mut global_signal = None;
    let mut signals: Vec<(u64, String, f64)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| Error::parse(origin, line_no, m);
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
        let number = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| err(format!("`{key}` needs a number, found `{v}`")))
        };
        let count = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| err(format!("`{key}` needs a non-negative integer, found `{v}`")))
        };
        match key {
            "n_entities" => cfg.n_entities = count(value)?,
            "children_min" => cfg.children_min = count(value)?,
            "children_max" => cfg.children_max = count(value)?,
            "quality_noise_sd" => cfg.quality_noise_sd = number(value)?,
            "seed" => {
                cfg.seed = value.parse().map_err(|_| {
                    err(format!("`seed` needs an unsigned integer, found `{value}`"))
                })?
            }
            "signal" => global_signal = Some(number(value)?),
            _ => {
                if let Some(name) = key.strip_prefix("signal.") {
                    signals.push((line_no, name.to_string(), number(value)?));
                } else if let Some(rest) = key.strip_prefix("attribute.") {
                    let (table, name) = rest.split_once('.').ok_or_else(|| {
                        err(format!(
                            "attribute key must be `attribute.<table>.<name>`, found `{key}`"
                        ))
                    })?;
                    let mut categories = Vec::new();
                    for item in value.split(',') {
                        let (cat, ord) = item.trim().split_once(':').ok_or_else(|| {
                            err(format!("category must be `name:ordinal`, found `{item}`"))
                        })?;
                        categories.push((cat.trim().to_string(), number(ord.trim())?));
                    }
                    attributes.push(SynthAttribute {
                        table: table.to_string(),
                        name: name.to_string(),
                        categories,
                        signal: 1.0,
                    });
                } else {
                    return Err(err(format!("unknown key `{key}`")));
                }
            }
        }
    }

    if !attributes.is_empty() {
        cfg.attributes = attributes;
    }
    if let Some(s) = global_signal {
        cfg = cfg.with_signal(s);
    }
    for (line, name, s) in signals {
        let attr = cfg
            .attributes
            .iter_mut()
            .find(|a| a.name == name)
            .ok_or_else(|| {
                Error::parse(
                    origin,
                    line,
                    format!("signal for unknown attribute `{name}`"),
                )
            })?;
        attr.signal = s;
    }
    cfg.validate().map_err(|source| Error::Data {
        path: origin.to_path_buf(),
        source,
    })?;
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<SynthConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Result<SynthConfig> {
        parse(text, Path::new("synth.cfg"))
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(p("# nothing\n\n").unwrap(), SynthConfig::default());
    }

    #[test]
    fn scalar_keys_and_signals() {
        let cfg = p("n_entities = 80\nseed=7\nsignal = 0\nsignal.teacher_edu = 2.5\n").unwrap();
        assert_eq!(cfg.n_entities, 80);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.attributes[0].signal, 0.0);
        assert_eq!(cfg.attributes[2].signal, 2.5);
    }

    #[test]
    fn custom_attributes_replace_defaults() {
        let cfg = p("attribute.staff.role = Junior:1, Mid:2, Senior:3 # ordinal\n").unwrap();
        assert_eq!(cfg.attributes.len(), 1);
        assert_eq!(cfg.attributes[0].table, "staff");
        assert_eq!(cfg.attributes[0].categories[2], ("Senior".to_string(), 3.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = p("seed = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(p("n_entities = -4").is_err());
        assert!(p("attribute.t.a = X:1,Y:2").is_err());
        assert!(p("signal.nope = 1").is_err());
    }
}
