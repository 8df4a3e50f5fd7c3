use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::File {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses JSON, reporting the offending field path and line on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str, source: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = if path == "." {
            inner.to_string()
        } else {
            format!("at `{path}`: {inner}")
        };
        Error::Parse {
            path: source.to_path_buf(),
            line: Some(inner.line() as u64),
            message,
        }
    })
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?, path)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `path` as given when absolute, otherwise relative to `base`'s directory.
pub fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new("")).join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Deserialize)]
    #[allow(dead_code)]
    struct Outer {
        inner: Vec<Inner>,
    }

    #[derive(Debug, Deserialize)]
    #[allow(dead_code)]
    struct Inner {
        x: f64,
    }

    #[test]
    fn field_path_in_errors() {
        let err = parse_json::<Outer>("{\"inner\": [{\"x\": 1}, {\"x\": \"a\"}]}", Path::new("s.json")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("s.json:1: at `inner[1].x`"), "{msg}");
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_text(Path::new("/no/such/file.json")).unwrap_err();
        assert!(err.to_string().starts_with("/no/such/file.json: "));
    }

    #[test]
    fn relative_resolution() {
        assert_eq!(resolve(Path::new("a/b/layout.json"), "cal.json"), PathBuf::from("a/b/cal.json"));
        assert_eq!(resolve(Path::new("layout.json"), "/x/cal.json"), PathBuf::from("/x/cal.json"));
    }
}
