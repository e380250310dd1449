use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use xrtraffic::profile::{builtin_profile, normalize_name, AppProfile, ProfileError};

/// Directory searched for `<name>.profile` files after the built-ins.
pub const PROFILE_DIR_ENV: &str = "XRTRAFFIC_PROFILE_DIR";

/// Bad input from the user: reported with exit code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl fmt::Display) -> anyhow::Error {
    Invalid(msg.to_string()).into()
}

/// Write via a temporary file in the same directory and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .with_context(|| format!("invalid output path {}", path.display()))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("cannot write {}", path.display()))
}

fn load_profile_file(path: &Path) -> anyhow::Result<AppProfile> {
    AppProfile::load(path).map_err(|e| match e {
        ProfileError::Io(_) => anyhow::Error::new(e).context(format!("cannot read {}", path.display())),
        other => invalid(format!("{}: {other}", path.display())),
    })
}

/// Resolve `--app`: an existing profile file, a built-in name, or a
/// `<name>.profile` file in the profile directory.
pub fn resolve_profile(app: &str) -> anyhow::Result<AppProfile> {
    let path = Path::new(app);
    if path.is_file() {
        return load_profile_file(path);
    }
    if let Ok(p) = builtin_profile(app) {
        return Ok(p);
    }
    if let Some(dir) = std::env::var_os(PROFILE_DIR_ENV) {
        let candidate = Path::new(&dir).join(format!("{}.profile", normalize_name(app)));
        if candidate.is_file() {
            return load_profile_file(&candidate);
        }
    }
    Err(invalid(format!(
        "unknown application '{app}' (built-ins: virus-popper, minecraft, ge-vr-tour, ge-vr-cities; \
         or pass a profile file)"
    )))
}

pub fn parse_rate_arg(s: &str) -> Result<f64, String> {
    xrtraffic::units::parse_rate(s).map_err(|e| e.to_string())
}
