//! Parameter resolution: explicit flag, then config file, then default. Every
//! resolved value is echoed into the provenance header.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use treescramble::output::{Cell, CsvWriter, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag, value or parameter range; exit status 2.
    Usage(String),
    /// Failure while running; exit status 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<treescramble::Error> for CliError {
    fn from(e: treescramble::Error) -> Self {
        use treescramble::Error as E;
        match e {
            E::InvalidModel(_)
            | E::InvalidParameter(_)
            | E::Parse(_)
            | E::NotPowerOfTwo(_)
            | E::IndexOutOfRange { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct Settings {
    file: RunConfig,
    provenance: RunConfig,
}

impl Settings {
    pub fn new(command: &str, file: RunConfig) -> Self {
        Self {
            file,
            provenance: RunConfig::new().with("command", command),
        }
    }

    /// Record a value that is fixed rather than configurable.
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.provenance.set(key, value);
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(text) => text.parse::<T>().map_err(|_| {
                    CliError::Usage(format!("cannot parse {key}={text} from config"))
                })?,
                None => default,
            },
        };
        self.provenance.set(key, &value);
        Ok(value)
    }

    /// Optional value; absent keys are recorded as `auto`.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some("auto") | None => None,
                Some(text) => Some(text.parse::<T>().map_err(|_| {
                    CliError::Usage(format!("cannot parse {key}={text} from config"))
                })?),
            },
        };
        match &value {
            Some(v) => self.provenance.set(key, v),
            None => self.provenance.set(key, "auto"),
        };
        Ok(value)
    }

    /// Comma-separated list.
    pub fn get_list<T>(
        &mut self,
        key: &str,
        flag: Option<String>,
        default: &str,
    ) -> CliResult<Vec<T>>
    where
        T: FromStr,
    {
        let text = self.get(key, flag, default.to_string())?;
        parse_list(key, &text)
    }

    pub fn provenance(&self) -> &RunConfig {
        &self.provenance
    }
}

pub fn parse_list<T: FromStr>(key: &str, text: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| CliError::Usage(format!("cannot parse `{t}` in {key}")))
        })
        .collect()
}

pub fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    match path {
        None => Ok(RunConfig::new()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            Ok(RunConfig::parse_file(&text)?)
        }
    }
}

/// Output directory plus the list of files written so far.
pub struct Sink {
    dir: PathBuf,
    /// Prepended to every file name.
    pub prefix: String,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            prefix: String::new(),
            written: Vec::new(),
        })
    }

    pub fn csv(
        &mut self,
        name: &str,
        provenance: &RunConfig,
        columns: &[&str],
        rows: impl IntoIterator<Item = Vec<Cell>>,
    ) -> CliResult<()> {
        let path = self.dir.join(format!("{}{name}", self.prefix));
        let file = std::io::BufWriter::new(fs::File::create(&path)?);
        let mut w = CsvWriter::new(file, provenance, columns)?;
        for row in rows {
            w.row(&row)?;
        }
        w.finish()?;
        self.written.push(path);
        Ok(())
    }

    /// Plain-text summary: provenance line, then `key: value` pairs in braces.
    pub fn summary(
        &mut self,
        name: &str,
        provenance: &RunConfig,
        entries: &[(String, String)],
    ) -> CliResult<()> {
        let path = self.dir.join(format!("{}{name}", self.prefix));
        let mut text = provenance.header_line();
        text.push_str("\n{\n");
        for (i, (k, v)) in entries.iter().enumerate() {
            let comma = if i + 1 < entries.len() { "," } else { "" };
            text.push_str(&format!("  \"{k}\": {v}{comma}\n"));
        }
        text.push_str("}\n");
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }
}
