use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use polyban_core::exactgeom::rational::{parse_rat, parse_vec};
use polyban_core::maps::LinMap;
use polyban_core::spaces::gallery;
use polyban_core::{parse_bundle, Bundle, Error, FraisseState, MonotoneSpace, Rat, RatMat, SpaceGalleryId, SymPolytope};

/// Failures split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn read_bundle(path: &Path) -> CliResult<Bundle> {
    let text = fs::read_to_string(path).map_err(Error::from)?;
    Ok(parse_bundle(&text)?)
}

/// Writes through a sibling temp file and a rename, so readers never see
/// a partial file.
pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| CliError::Usage(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(|e| CliError::Domain(e.into()))
}

/// Writes to `out` if given, otherwise prints.
pub fn output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// A gallery id such as `l1:3`, or the path of a space bundle.
pub fn load_ball(arg: &str) -> CliResult<SymPolytope> {
    if let Ok(id) = arg.parse::<SpaceGalleryId>() {
        return Ok(gallery(&id)?.space.into_ball());
    }
    if looks_like_gallery(arg) {
        // Surface the grammar error instead of a missing-file error.
        arg.parse::<SpaceGalleryId>()?;
    }
    match read_bundle(Path::new(arg))? {
        Bundle::Space(b) => Ok(b),
        other => usage(format!("{arg}: expected a space bundle, found {}", other.kind())),
    }
}

fn looks_like_gallery(arg: &str) -> bool {
    ["l1:", "linf:", "lp:"].iter().any(|p| arg.starts_with(p)) && !Path::new(arg).exists()
}

pub fn load_space(arg: &str) -> CliResult<MonotoneSpace> {
    Ok(MonotoneSpace::new(load_ball(arg)?)?)
}

pub fn load_state(path: &Path) -> CliResult<FraisseState> {
    match read_bundle(path)? {
        Bundle::State(s) => Ok(s),
        other => usage(format!("{}: expected a state bundle, found {}", path.display(), other.kind())),
    }
}

pub fn rat_arg(s: &str) -> CliResult<Rat> {
    parse_rat(s).or_else(|_| usage(format!("not a rational: {s:?}")))
}

pub fn vec_arg(s: &str) -> CliResult<Vec<Rat>> {
    parse_vec(s).or_else(|_| usage(format!("not a vector of rationals: {s:?}")))
}

/// `--map`: a map bundle path, `id`, `zero`, `incl`, or inline rows such
/// as `"1,0;0,1"`. All but the first need `--from` and `--to`.
pub fn load_map(map: &str, from: Option<&str>, to: Option<&str>) -> CliResult<LinMap> {
    let ends = || -> CliResult<(SymPolytope, SymPolytope)> {
        match (from, to) {
            (Some(f), Some(t)) => Ok((load_ball(f)?, load_ball(t)?)),
            _ => usage(format!("--map {map} needs --from and --to")),
        }
    };
    match map {
        "id" => {
            let (d, c) = ends()?;
            if d.dim() != c.dim() {
                return Err(Error::DimensionMismatch { expected: d.dim(), found: c.dim() }.into());
            }
            Ok(LinMap::new(d, c.clone(), RatMat::identity(c.dim()))?)
        }
        "zero" => {
            let (d, c) = ends()?;
            Ok(LinMap::zero(&d, &c))
        }
        "incl" => {
            let (d, c) = ends()?;
            Ok(LinMap::inclusion(&d, &c)?)
        }
        s if !Path::new(s).exists() => {
            let (d, c) = ends()?;
            let rows = s.split(';').map(vec_arg).collect::<CliResult<Vec<_>>>()?;
            let m = RatMat::from_row_vecs(d.dim(), &rows)?;
            Ok(LinMap::new(d, c, m)?)
        }
        path => match read_bundle(Path::new(path))? {
            Bundle::Map(t) => {
                if from.is_some() || to.is_some() {
                    return usage("--from/--to cannot override a map bundle");
                }
                Ok(t)
            }
            other => usage(format!("{path}: expected a map bundle, found {}", other.kind())),
        },
    }
}
