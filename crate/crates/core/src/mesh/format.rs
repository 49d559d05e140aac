//! Line-oriented ASCII mesh format.
//!
//! ```text
//! mce-mesh 1
//! vertices N
//! x y            (N lines)
//! triangles M
//! i j k          (M lines, 0-based, counter-clockwise)
//! boundary K
//! i j tag        (K lines)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Boundary edges that
//! are not listed are tagged [`DEFAULT_BOUNDARY_TAG`].

use std::fmt::Write as _;
use std::io::Read;

use super::{MacroMesh, MeshError, DEFAULT_BOUNDARY_TAG};
use crate::geometry::{signed_area, Vec2};

const HEADER: &str = "mce-mesh 1";

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    /// Next significant line with its 1-based number.
    fn next(&mut self) -> Result<(usize, &'a str), MeshError> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok((i + 1, line));
        }
        Err(MeshError::Parse {
            line: self.last + 1,
            message: "unexpected end of input".into(),
        })
    }

    fn section(&mut self, keyword: &str) -> Result<usize, MeshError> {
        let (line, text) = self.next()?;
        let mut parts = text.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(count), None) if k == keyword => {
                count.parse().map_err(|_| MeshError::Parse {
                    line,
                    message: format!("invalid {keyword} count `{count}`"),
                })
            }
            _ => Err(MeshError::Parse {
                line,
                message: format!("expected `{keyword} <count>`, found `{text}`"),
            }),
        }
    }
}

fn fields<const N: usize>(line: usize, text: &str) -> Result<[&str; N], MeshError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    parts.try_into().map_err(|p: Vec<&str>| MeshError::Parse {
        line,
        message: format!("expected {N} fields, found {}", p.len()),
    })
}

fn number<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, MeshError> {
    s.parse().map_err(|_| MeshError::Parse {
        line,
        message: format!("invalid number `{s}`"),
    })
}

/// Parses a mesh. Clockwise triangles are reoriented with a warning.
pub fn read_mesh(mut input: impl Read) -> Result<MacroMesh, MeshError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| MeshError::Parse {
            line: 0,
            message: e.to_string(),
        })?;
    let mut lines = Lines::new(&text);

    let (line, header) = lines.next()?;
    if header != HEADER {
        return Err(MeshError::Parse {
            line,
            message: format!("expected header `{HEADER}`, found `{header}`"),
        });
    }

    let nv = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = lines.next()?;
        let [x, y] = fields::<2>(line, text)?;
        vertices.push(Vec2::new(number(line, x)?, number(line, y)?));
    }

    let nt = lines.section("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    for t in 0..nt {
        let (line, text) = lines.next()?;
        let raw = fields::<3>(line, text)?;
        let mut tri = [0usize; 3];
        for (slot, s) in tri.iter_mut().zip(raw) {
            *slot = number(line, s)?;
            if *slot >= nv {
                return Err(MeshError::Parse {
                    line,
                    message: format!("vertex index {slot} out of range (mesh has {nv} vertices)"),
                });
            }
        }
        let [a, b, c] = tri.map(|i| vertices[i]);
        if signed_area(a, b, c) < 0.0 {
            log::warn!("line {line}: triangle {t} is clockwise; reorienting");
            tri.swap(1, 2);
        }
        triangles.push(tri);
    }

    let nb = lines.section("boundary")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, text) = lines.next()?;
        let [i, j, tag] = fields::<3>(line, text)?;
        let (i, j): (usize, usize) = (number(line, i)?, number(line, j)?);
        if i >= nv || j >= nv {
            return Err(MeshError::Parse {
                line,
                message: format!("boundary vertex index out of range (mesh has {nv} vertices)"),
            });
        }
        boundary.push(([i, j], tag.to_string()));
    }

    MacroMesh::from_parts(vertices, triangles, &boundary, DEFAULT_BOUNDARY_TAG).map_err(|e| {
        MeshError::Parse {
            line: lines.last,
            message: e.to_string(),
        }
    })
}

/// Serializes a mesh; coordinates use the shortest representation that
/// reads back to the identical `f64`.
pub fn write_mesh(mesh: &MacroMesh) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "vertices {}", mesh.num_vertices()).unwrap();
    for v in mesh.vertices() {
        writeln!(out, "{} {}", v.x, v.y).unwrap();
    }
    writeln!(out, "triangles {}", mesh.num_triangles()).unwrap();
    for [a, b, c] in mesh.triangles() {
        writeln!(out, "{a} {b} {c}").unwrap();
    }
    let boundary: Vec<usize> = mesh.boundary_edges().collect();
    writeln!(out, "boundary {}", boundary.len()).unwrap();
    for e in boundary {
        let [a, b] = mesh.edges()[e].vertices;
        writeln!(out, "{a} {b} {}", mesh.edge_tag(e).unwrap()).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "mce-mesh 1
vertices 4
0 0
1 0
1 1
0 1
triangles 2
0 1 2
0 2 3
boundary 1
0 1 bottom
";

    #[test]
    fn reads_unit_square() {
        let m = read_mesh(SQUARE.as_bytes()).unwrap();
        assert_eq!(m.num_edges(), 5);
        let tags: Vec<_> = m.boundary_edges().map(|e| m.edge_tag(e).unwrap()).collect();
        assert_eq!(tags.iter().filter(|t| **t == "bottom").count(), 1);
        assert_eq!(
            tags.iter().filter(|t| **t == DEFAULT_BOUNDARY_TAG).count(),
            3
        );
    }

    #[test]
    fn out_of_range_index_names_the_line() {
        let bad = SQUARE.replace("0 2 3", "0 2 7");
        match read_mesh(bad.as_bytes()) {
            Err(MeshError::Parse { line, message }) => {
                assert_eq!(line, 9);
                assert!(message.contains("out of range"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_is_rejected() {
        let bad = SQUARE.replace("mce-mesh 1", "mesh 2");
        assert!(matches!(
            read_mesh(bad.as_bytes()),
            Err(MeshError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn clockwise_triangle_is_reoriented() {
        let cw = SQUARE.replace("0 1 2", "0 2 1");
        let m = read_mesh(cw.as_bytes()).unwrap();
        for t in 0..m.num_triangles() {
            assert!(m.triangle_area(t) > 0.0);
        }
    }

    #[test]
    fn round_trip_of_generated_mesh() {
        let m = MacroMesh::unit_square(3).unwrap();
        let back = read_mesh(write_mesh(&m).as_bytes()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn round_trip_is_bit_exact_for_awkward_coordinates() {
        let m = MacroMesh::cook_membrane(7).unwrap();
        let back = read_mesh(write_mesh(&m).as_bytes()).unwrap();
        for (a, b) in m.vertices().iter().zip(back.vertices()) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
    }
}
