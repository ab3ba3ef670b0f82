//! Parameters: each one can come from a flag, a `key=value` config file, or
//! its default, in that order of precedence. A run manifest is itself a valid
//! config file, so any run can be replayed from its manifest.

use crate::Failure;
use bellrand_core::io::{fmt_f64, Manifest};
use std::path::Path;

/// Manifest keys that describe a run rather than configure it.
const RESERVED: [&str; 3] = ["format", "command", "version"];
const RESERVED_PREFIXES: [&str; 4] = ["format.", "input.", "output.", "result."];

pub trait Param: Sized {
    fn parse(s: &str) -> Result<Self, String>;
    fn echo(&self) -> String;
}

impl Param for f64 {
    fn parse(s: &str) -> Result<Self, String> {
        s.parse().map_err(|_| format!("`{s}` is not a number"))
    }

    // 12 digits when that is exact, else enough digits to round-trip
    fn echo(&self) -> String {
        let short = fmt_f64(*self);
        if short.parse::<f64>() == Ok(*self) {
            short
        } else {
            format!("{self:e}")
        }
    }
}

/// Optional number; `auto` means derive it from the other parameters.
impl Param for Option<f64> {
    fn parse(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(None)
        } else {
            f64::parse(s).map(Some)
        }
    }

    fn echo(&self) -> String {
        self.map_or("auto".into(), |x| x.echo())
    }
}

impl Param for u64 {
    // integers may be written as `1e6`
    fn parse(s: &str) -> Result<Self, String> {
        if let Ok(v) = s.parse() {
            return Ok(v);
        }
        match s.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= 2f64.powi(53) => Ok(x as u64),
            _ => Err(format!("`{s}` is not a non-negative integer")),
        }
    }

    fn echo(&self) -> String {
        self.to_string()
    }
}

impl Param for usize {
    fn parse(s: &str) -> Result<Self, String> {
        u64::parse(s).map(|v| v as usize)
    }

    fn echo(&self) -> String {
        self.to_string()
    }
}

impl Param for bool {
    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(format!("`{s}` is not true or false")),
        }
    }

    fn echo(&self) -> String {
        self.to_string()
    }
}

impl Param for String {
    fn parse(s: &str) -> Result<Self, String> {
        Ok(s.to_string())
    }

    fn echo(&self) -> String {
        self.clone()
    }
}

/// Loaded config file (or an empty one).
pub struct Config {
    pub entries: Manifest,
}

impl Config {
    pub fn load(path: Option<&Path>, command: &str, groups: &[&[&str]]) -> Result<Self, Failure> {
        let entries = match path {
            None => Manifest::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Manifest::parse(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", p.display())))?
            }
        };
        for (k, v) in &entries.entries {
            if k == "command" && v != command {
                return Err(Failure::Usage(format!("config is for `{v}`, not `{command}`")));
            }
            let reserved = RESERVED.contains(&k.as_str()) || RESERVED_PREFIXES.iter().any(|p| k.starts_with(p));
            if !reserved && !groups.iter().any(|g| g.contains(&k.as_str())) {
                return Err(Failure::Usage(format!("unknown config key `{k}` for `{command}`")));
            }
        }
        Ok(Config { entries })
    }

    pub fn pick<T: Param>(&self, key: &str, flag: Option<&str>, default: impl FnOnce() -> T) -> Result<T, Failure> {
        let bad = |e: String| Failure::Usage(format!("--{}: {e}", key.replace('_', "-")));
        match flag.or_else(|| self.entries.get(key)) {
            Some(s) => T::parse(s).map_err(bad),
            None => Ok(default()),
        }
    }
}

/// Declares a flag group (all `Option<String>`, parsed through [`Param`]) and
/// the resolved struct it fills.
macro_rules! params {
    ($args:ident => $resolved:ident {
        $( $(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr ),* $(,)?
    }) => {
        #[derive(clap::Args, Debug, Clone, Default)]
        pub struct $args {
            $( $(#[doc = $doc])* #[arg(long, value_name = "VALUE", allow_negative_numbers = true)] pub $field: Option<String>, )*
        }

        #[derive(Debug, Clone)]
        pub struct $resolved {
            $( pub $field: $ty, )*
        }

        impl $args {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            pub fn resolve(&self, cfg: &$crate::params::Config) -> Result<$resolved, $crate::Failure> {
                Ok($resolved {
                    $( $field: cfg.pick(stringify!($field), self.$field.as_deref(), || $default)?, )*
                })
            }
        }

        impl $resolved {
            pub fn echo(&self, m: &mut bellrand_core::io::Manifest) {
                use $crate::params::Param;
                $( m.set(stringify!($field), self.$field.echo()); )*
            }
        }
    };
}

pub(crate) use params;
