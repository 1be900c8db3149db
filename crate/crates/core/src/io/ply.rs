use std::fmt::Write;

use super::{fmt_f64, PolygonSoup};
use crate::mesh::{Point, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Encoding {
    Ascii,
    LittleEndian,
    BigEndian,
}

#[derive(Clone, Copy, Debug)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    encoding: Encoding,
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> Reader<'a> {
    fn read(&mut self, ty: Scalar) -> Result<f64, String> {
        if self.encoding == Encoding::Ascii {
            let t = self.tokens.next().ok_or("unexpected end of data")?;
            return t.parse::<f64>().map_err(|_| format!("bad number {t:?}"));
        }
        let n = ty.size();
        let bytes = self
            .data
            .get(self.pos..self.pos + n)
            .ok_or("unexpected end of binary data")?;
        self.pos += n;
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(bytes);
        if self.encoding == Encoding::BigEndian {
            buf[..n].reverse();
        }
        Ok(match ty {
            Scalar::I8 => buf[0] as i8 as f64,
            Scalar::U8 => buf[0] as f64,
            Scalar::I16 => i16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([buf[0], buf[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(buf),
        })
    }
}

pub(crate) fn parse(bytes: &[u8]) -> Result<PolygonSoup, String> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or("missing end_header")?;
    let mut body_start = end + END.len();
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start += 1;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| "header is not UTF-8")?;

    let mut lines = header.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err("missing ply magic".into());
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["format", fmt, ..] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::LittleEndian,
                    "binary_big_endian" => Encoding::BigEndian,
                    other => return Err(format!("unknown format {other}")),
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| format!("bad element count {count}"))?,
                properties: Vec::new(),
            }),
            ["property", "list", count_ty, item_ty, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                let c = Scalar::parse(count_ty).ok_or_else(|| format!("bad type {count_ty}"))?;
                let i = Scalar::parse(item_ty).ok_or_else(|| format!("bad type {item_ty}"))?;
                el.properties.push(Property::List(name.to_string(), c, i));
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or("property before element")?;
                let t = Scalar::parse(ty).ok_or_else(|| format!("bad type {ty}"))?;
                el.properties.push(Property::Scalar(name.to_string(), t));
            }
            _ => {}
        }
    }
    let encoding = encoding.ok_or("missing format line")?;
    let body = &bytes[body_start.min(bytes.len())..];
    let text = if encoding == Encoding::Ascii {
        std::str::from_utf8(body).map_err(|_| "ascii body is not UTF-8")?
    } else {
        ""
    };
    let mut reader = Reader {
        data: body,
        pos: 0,
        encoding,
        tokens: text.split_ascii_whitespace(),
    };

    let mut soup = PolygonSoup::default();
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        for i in 0..el.count {
            let mut xyz = [0.0f64; 3];
            for p in &el.properties {
                match p {
                    Property::Scalar(name, ty) => {
                        let v = reader.read(*ty)?;
                        if is_vertex {
                            match name.as_str() {
                                "x" => xyz[0] = v,
                                "y" => xyz[1] = v,
                                "z" => xyz[2] = v,
                                _ => {}
                            }
                        }
                    }
                    Property::List(name, count_ty, item_ty) => {
                        let n = reader.read(*count_ty)? as usize;
                        let mut items = Vec::with_capacity(n);
                        for _ in 0..n {
                            items.push(reader.read(*item_ty)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            let poly = items
                                .into_iter()
                                .map(|x| {
                                    if x < 0.0 || x.fract() != 0.0 {
                                        Err(format!("face {i}: bad index {x}"))
                                    } else {
                                        Ok(x as usize)
                                    }
                                })
                                .collect::<Result<Vec<_>, _>>()?;
                            soup.polygons.push(poly);
                        }
                    }
                }
            }
            if is_vertex {
                soup.vertices.push(Point::new(xyz[0], xyz[1], xyz[2]));
            }
        }
    }
    let nv = soup.vertices.len();
    if let Some(bad) = soup.polygons.iter().flatten().find(|&&v| v >= nv) {
        return Err(format!("face index {bad} out of range"));
    }
    Ok(soup)
}

/// ASCII PLY. With `face_colors`, every face gets its own three vertices
/// carrying the face's RGB color.
pub(crate) fn write_ascii(mesh: &TriMesh, face_colors: Option<&[[u8; 3]]>) -> String {
    let mut s = String::new();
    let colored = face_colors.is_some();
    let nv = if colored { 3 * mesh.num_faces() } else { mesh.vertices().len() };
    writeln!(s, "ply\nformat ascii 1.0\nelement vertex {nv}").unwrap();
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    if colored {
        s.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    writeln!(s, "element face {}", mesh.num_faces()).unwrap();
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    let vert = |s: &mut String, p: &Point| {
        write!(s, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z)).unwrap();
    };
    match face_colors {
        Some(colors) => {
            for (f, c) in mesh.faces().iter().zip(colors) {
                for &v in f {
                    vert(&mut s, &mesh.vertices()[v]);
                    writeln!(s, " {} {} {}", c[0], c[1], c[2]).unwrap();
                }
            }
            for f in 0..mesh.num_faces() {
                writeln!(s, "3 {} {} {}", 3 * f, 3 * f + 1, 3 * f + 2).unwrap();
            }
        }
        None => {
            for p in mesh.vertices() {
                vert(&mut s, p);
                s.push('\n');
            }
            for f in mesh.faces() {
                writeln!(s, "3 {} {} {}", f[0], f[1], f[2]).unwrap();
            }
        }
    }
    s
}
