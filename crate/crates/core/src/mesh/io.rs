//! Mesh file formats.
//!
//! * `NOFF` (any `k`, `n`): header line `NOFF k n`, then `V C`, then `V`
//!   vertex lines of `n` floats, then `C` cell lines of `k + 1` indices.
//! * `OFF` (triangles in `R^3`): standard `OFF` with `3 i j k` faces.
//! * `OBJ` (`R^3`): `v x y z` vertices with 1-based `f` triangles or `l` segments.
//!
//! Boundary flags are not stored; they are recomputed from face incidence on
//! load and checked against the unit sphere. Floats are written in shortest
//! round-trip form, so save followed by load is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SimplicialSurface;
use crate::error::{Error, Result};
use crate::vector::AmbientVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Noff,
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("noff") => Ok(Self::Noff),
            Some("off") => Ok(Self::Off),
            Some("obj") => Ok(Self::Obj),
            other => Err(Error::Domain(format!(
                "unknown mesh extension {other:?} for {}",
                path.display()
            ))),
        }
    }
}

pub fn load(path: &Path) -> Result<SimplicialSurface> {
    let format = MeshFormat::from_path(path)?;
    let file = BufReader::new(File::open(path)?);
    match format {
        MeshFormat::Noff => read_noff(file),
        MeshFormat::Off => read_off(file),
        MeshFormat::Obj => read_obj(file),
    }
}

pub fn save(surface: &SimplicialSurface, path: &Path) -> Result<()> {
    let format = MeshFormat::from_path(path)?;
    let mut file = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Noff => write_noff(surface, &mut file)?,
        MeshFormat::Off => write_off(surface, &mut file)?,
        MeshFormat::Obj => write_obj(surface, &mut file)?,
    }
    file.flush()?;
    Ok(())
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(reader: impl Read) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((i + 1, body.to_string()));
        }
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from {tok:?}"),
    })
}

fn expect_tokens(tokens: &[&str], count: usize, line: usize, what: &str) -> Result<()> {
    if tokens.len() != count {
        return Err(Error::Parse {
            line,
            message: format!("expected {count} {what}, found {}", tokens.len()),
        });
    }
    Ok(())
}

struct Lines {
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl Lines {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&str>)> {
        let last = self.lines.last().map_or(0, |l| l.0);
        let (no, text) = self.lines.get(self.pos).ok_or_else(|| Error::Parse {
            line: last,
            message: format!("unexpected end of file while reading {what}"),
        })?;
        self.pos += 1;
        Ok((*no, text.split_whitespace().collect()))
    }
}

fn read_vertex(tokens: &[&str], line: usize, n: usize) -> Result<AmbientVector> {
    expect_tokens(tokens, n, line, "coordinates")?;
    let coords = tokens
        .iter()
        .map(|t| parse::<f64>(t, line, "coordinate"))
        .collect::<Result<Vec<_>>>()?;
    AmbientVector::new(coords).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

fn read_indices(tokens: &[&str], line: usize) -> Result<Vec<usize>> {
    tokens
        .iter()
        .map(|t| parse::<usize>(t, line, "vertex index"))
        .collect()
}

pub fn read_noff(reader: impl Read) -> Result<SimplicialSurface> {
    let mut lines = Lines {
        lines: content_lines(reader)?,
        pos: 0,
    };
    let (no, header) = lines.next("header")?;
    if header.first() != Some(&"NOFF") || header.len() != 3 {
        return Err(Error::Parse {
            line: no,
            message: "expected header `NOFF k n`".into(),
        });
    }
    let k: usize = parse(header[1], no, "k")?;
    let n: usize = parse(header[2], no, "n")?;
    let (no, counts) = lines.next("counts")?;
    expect_tokens(&counts, 2, no, "counts")?;
    let nv: usize = parse(counts[0], no, "vertex count")?;
    let nc: usize = parse(counts[1], no, "cell count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, t) = lines.next("vertex")?;
        vertices.push(read_vertex(&t, no, n)?);
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (no, t) = lines.next("cell")?;
        expect_tokens(&t, k + 1, no, "cell indices")?;
        cells.push(read_indices(&t, no)?);
    }
    SimplicialSurface::new(k, vertices, cells)
}

pub fn write_noff(s: &SimplicialSurface, w: &mut impl Write) -> Result<()> {
    writeln!(w, "NOFF {} {}", s.k(), s.ambient_dim())?;
    writeln!(w, "{} {}", s.vertices().len(), s.cells().len())?;
    for v in s.vertices() {
        write_floats(w, v.coords())?;
    }
    for c in s.cells() {
        write_indices(w, c, 0)?;
    }
    Ok(())
}

fn write_floats(w: &mut impl Write, coords: &[f64]) -> Result<()> {
    let line: Vec<String> = coords.iter().map(|c| format!("{c:?}")).collect();
    writeln!(w, "{}", line.join(" "))?;
    Ok(())
}

fn write_indices(w: &mut impl Write, cell: &[usize], offset: usize) -> Result<()> {
    let line: Vec<String> = cell.iter().map(|i| (i + offset).to_string()).collect();
    writeln!(w, "{}", line.join(" "))?;
    Ok(())
}

pub fn read_off(reader: impl Read) -> Result<SimplicialSurface> {
    let mut lines = Lines {
        lines: content_lines(reader)?,
        pos: 0,
    };
    let (no, header) = lines.next("header")?;
    if header.first() != Some(&"OFF") {
        return Err(Error::Parse {
            line: no,
            message: "expected `OFF` header".into(),
        });
    }
    // Counts may share the header line.
    let counts: Vec<&str> = if header.len() > 1 {
        header[1..].to_vec()
    } else {
        lines.next("counts")?.1
    };
    if counts.len() < 2 {
        return Err(Error::Parse {
            line: no,
            message: "expected vertex and face counts".into(),
        });
    }
    let nv: usize = parse(counts[0], no, "vertex count")?;
    let nf: usize = parse(counts[1], no, "face count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, t) = lines.next("vertex")?;
        vertices.push(read_vertex(&t, no, 3)?);
    }
    let mut cells = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (no, t) = lines.next("face")?;
        let idx = read_indices(&t, no)?;
        if idx.first() != Some(&3) || idx.len() != 4 {
            return Err(Error::Parse {
                line: no,
                message: "only triangular faces are supported".into(),
            });
        }
        cells.push(idx[1..].to_vec());
    }
    SimplicialSurface::new(2, vertices, cells)
}

pub fn write_off(s: &SimplicialSurface, w: &mut impl Write) -> Result<()> {
    if s.k() != 2 || s.ambient_dim() != 3 {
        return Err(Error::Domain(
            "OFF output needs a triangle mesh in R^3".into(),
        ));
    }
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", s.vertices().len(), s.cells().len())?;
    for v in s.vertices() {
        write_floats(w, v.coords())?;
    }
    for c in s.cells() {
        writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    Ok(())
}

pub fn read_obj(reader: impl Read) -> Result<SimplicialSurface> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut segments = Vec::new();
    for (no, text) in content_lines(reader)? {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens[0] {
            "v" => {
                // Optional homogeneous weight is ignored.
                let coords = &tokens[1..tokens.len().min(4)];
                vertices.push(read_vertex(coords, no, 3)?);
            }
            "f" | "l" => {
                let idx = tokens[1..]
                    .iter()
                    .map(|t| {
                        let head = t.split('/').next().unwrap_or("");
                        let i: usize = parse(head, no, "vertex index")?;
                        i.checked_sub(1).ok_or_else(|| Error::Parse {
                            line: no,
                            message: "OBJ indices are 1-based".into(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                match (tokens[0], idx.len()) {
                    ("f", 3) => triangles.push(idx),
                    ("l", 2) => segments.push(idx),
                    _ => {
                        return Err(Error::Parse {
                            line: no,
                            message: "only triangles (`f`) and segments (`l`) are supported".into(),
                        })
                    }
                }
            }
            _ => {}
        }
    }
    match (triangles.is_empty(), segments.is_empty()) {
        (false, true) => SimplicialSurface::new(2, vertices, triangles),
        (true, false) => SimplicialSurface::new(1, vertices, segments),
        _ => Err(Error::Parse {
            line: 0,
            message: "OBJ file must contain either triangles or segments".into(),
        }),
    }
}

pub fn write_obj(s: &SimplicialSurface, w: &mut impl Write) -> Result<()> {
    if s.ambient_dim() != 3 {
        return Err(Error::Domain("OBJ output needs vertices in R^3".into()));
    }
    for v in s.vertices() {
        write!(w, "v ")?;
        write_floats(w, v.coords())?;
    }
    let tag = if s.k() == 2 { "f" } else { "l" };
    for c in s.cells() {
        write!(w, "{tag} ")?;
        write_indices(w, c, 1)?;
    }
    Ok(())
}
