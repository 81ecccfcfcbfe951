//! JSON region documents.
//!
//! ```json
//! {"manifold": "sphere", "n": 2,
//!  "region": {"type": "union", "parts": [
//!     {"type": "cap", "center": [0, 0, 1], "radius": 0.3},
//!     {"type": "polygon", "vertices": [[1, 0, 0.2], [0, 1, 0.2], [0, 0, 1]]}]}}
//! ```
//!
//! Hyperbolic points are given in full hyperboloid coordinates `(x1..xn, t)`;
//! intervals (`n = 1` only) are `{"type": "intervals", "intervals": [[a, b], ...]}`.
//! Every error carries the line of the offending value.

use std::collections::HashMap;

use serde_json::{json, Map, Value};

use super::{Domain, HRegion, Region};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::{HyperPoint, SpherePoint};

/// A parsed region on either manifold.
#[derive(Clone, Debug)]
pub enum AnyRegion {
    Sphere(Region),
    Hyper(HRegion),
}

impl AnyRegion {
    pub fn dim(&self) -> usize {
        match self {
            AnyRegion::Sphere(r) => r.dim(),
            AnyRegion::Hyper(r) => r.dim(),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            AnyRegion::Sphere(r) => r.measure(),
            AnyRegion::Hyper(r) => r.measure(),
        }
    }
}

/// Source line of every value, keyed by its path (`region.parts[1].radius`).
fn value_lines(src: &str) -> HashMap<String, usize> {
    struct Scan<'a> {
        b: &'a [u8],
        i: usize,
        line: usize,
        out: HashMap<String, usize>,
    }
    impl Scan<'_> {
        fn ws(&mut self) {
            while self.i < self.b.len() && (self.b[self.i] as char).is_whitespace() {
                if self.b[self.i] == b'\n' {
                    self.line += 1;
                }
                self.i += 1;
            }
        }
        fn string(&mut self) -> String {
            let start = self.i + 1;
            self.i += 1;
            while self.i < self.b.len() && self.b[self.i] != b'"' {
                if self.b[self.i] == b'\\' {
                    self.i += 1;
                }
                self.i += 1;
            }
            let s = String::from_utf8_lossy(&self.b[start..self.i.min(self.b.len())]).into_owned();
            self.i += 1;
            s
        }
        fn value(&mut self, path: String) {
            self.ws();
            self.out.insert(path.clone(), self.line);
            match self.b.get(self.i) {
                Some(b'{') => {
                    self.i += 1;
                    loop {
                        self.ws();
                        match self.b.get(self.i) {
                            Some(b'}') | None => break,
                            Some(b',') => self.i += 1,
                            _ => {
                                let key = self.string();
                                self.ws();
                                self.i += 1; // ':'
                                let p = if path.is_empty() {
                                    key
                                } else {
                                    format!("{path}.{key}")
                                };
                                self.value(p);
                            }
                        }
                    }
                    self.i += 1;
                }
                Some(b'[') => {
                    self.i += 1;
                    let mut k = 0;
                    loop {
                        self.ws();
                        match self.b.get(self.i) {
                            Some(b']') | None => break,
                            Some(b',') => self.i += 1,
                            _ => {
                                self.value(format!("{path}[{k}]"));
                                k += 1;
                            }
                        }
                    }
                    self.i += 1;
                }
                Some(b'"') => {
                    self.string();
                }
                _ => {
                    while self.i < self.b.len() && !b",]} \t\r\n".contains(&self.b[self.i]) {
                        self.i += 1;
                    }
                }
            }
        }
    }
    let mut s = Scan {
        b: src.as_bytes(),
        i: 0,
        line: 1,
        out: HashMap::new(),
    };
    s.value(String::new());
    s.out
}

struct Ctx {
    lines: HashMap<String, usize>,
}

impl Ctx {
    fn err(&self, path: &str, msg: impl Into<String>) -> Error {
        let line = self.lines.get(path).copied().unwrap_or(1);
        Error::Parse {
            line,
            msg: format!(
                "{}: {}",
                if path.is_empty() { "document" } else { path },
                msg.into()
            ),
        }
    }

    fn field<'v>(&self, obj: &'v Map<String, Value>, path: &str, key: &str) -> Result<&'v Value> {
        obj.get(key)
            .ok_or_else(|| self.err(path, format!("missing field '{key}'")))
    }

    fn object<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Map<String, Value>> {
        v.as_object()
            .ok_or_else(|| self.err(path, "expected an object"))
    }

    fn number(&self, v: &Value, path: &str) -> Result<f64> {
        v.as_f64()
            .ok_or_else(|| self.err(path, "expected a number"))
    }

    fn array<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Vec<Value>> {
        v.as_array()
            .ok_or_else(|| self.err(path, "expected an array"))
    }

    fn coords(&self, v: &Value, path: &str, n: usize) -> Result<Vec<f64>> {
        let arr = self.array(v, path)?;
        if arr.len() != n + 1 {
            return Err(self.err(
                path,
                format!(
                    "expected {} coordinates for n = {n}, got {}",
                    n + 1,
                    arr.len()
                ),
            ));
        }
        arr.iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &format!("{path}[{i}]")))
            .collect()
    }

    fn region_type<'v>(&self, obj: &'v Map<String, Value>, path: &str) -> Result<&'v str> {
        self.field(obj, path, "type")?
            .as_str()
            .ok_or_else(|| self.err(&format!("{path}.type"), "expected a string"))
    }

    fn sphere(&self, v: &Value, path: &str, n: usize) -> Result<Region> {
        let obj = self.object(v, path)?;
        let at = |e: Error| self.err(path, e.to_string());
        match self.region_type(obj, path)? {
            "cap" => {
                let cp = format!("{path}.center");
                let c = self.coords(self.field(obj, path, "center")?, &cp, n)?;
                let c = SpherePoint::new(c).map_err(|e| self.err(&cp, e.to_string()))?;
                let rp = format!("{path}.radius");
                let r = self.number(self.field(obj, path, "radius")?, &rp)?;
                Region::cap(c, r).map_err(|e| self.err(&rp, e.to_string()))
            }
            "polygon" => {
                if n != 2 {
                    return Err(self.err(path, "polygons are supported for n = 2 only"));
                }
                let vp = format!("{path}.vertices");
                let verts = self.array(self.field(obj, path, "vertices")?, &vp)?;
                let pts = verts
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let p = format!("{vp}[{i}]");
                        SpherePoint::new(self.coords(x, &p, n)?)
                            .map_err(|e| self.err(&p, e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Region::polygon(pts).map_err(at)
            }
            "union" => {
                let pp = format!("{path}.parts");
                let parts = self.array(self.field(obj, path, "parts")?, &pp)?;
                let parts = parts
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.sphere(x, &format!("{pp}[{i}]"), n))
                    .collect::<Result<Vec<_>>>()?;
                Region::union(parts).map_err(at)
            }
            "intervals" => Err(self.err(path, "intervals are only defined on the hyperbolic line")),
            other => Err(self.err(
                &format!("{path}.type"),
                format!("unknown region type '{other}'"),
            )),
        }
    }

    fn hyper(&self, v: &Value, path: &str, n: usize) -> Result<HRegion> {
        let obj = self.object(v, path)?;
        let at = |e: Error| self.err(path, e.to_string());
        let point = |x: &Value, p: &str| -> Result<HyperPoint> {
            HyperPoint::new(self.coords(x, p, n)?).map_err(|e| self.err(p, e.to_string()))
        };
        match self.region_type(obj, path)? {
            "cap" => {
                let c = point(self.field(obj, path, "center")?, &format!("{path}.center"))?;
                let rp = format!("{path}.radius");
                let r = self.number(self.field(obj, path, "radius")?, &rp)?;
                HRegion::cap(c, r).map_err(|e| self.err(&rp, e.to_string()))
            }
            "polygon" => {
                if n != 2 {
                    return Err(self.err(path, "polygons are supported for n = 2 only"));
                }
                let vp = format!("{path}.vertices");
                let verts = self.array(self.field(obj, path, "vertices")?, &vp)?;
                let pts = verts
                    .iter()
                    .enumerate()
                    .map(|(i, x)| point(x, &format!("{vp}[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                HRegion::polygon(pts).map_err(at)
            }
            "intervals" => {
                if n != 1 {
                    return Err(self.err(path, "intervals require n = 1"));
                }
                let ip = format!("{path}.intervals");
                let list = self.array(self.field(obj, path, "intervals")?, &ip)?;
                let ivs = list
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let p = format!("{ip}[{i}]");
                        let pair = self.array(x, &p)?;
                        if pair.len() != 2 {
                            return Err(self.err(&p, "expected [a, b]"));
                        }
                        Ok((self.number(&pair[0], &p)?, self.number(&pair[1], &p)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                HRegion::intervals(ivs).map_err(at)
            }
            "union" => {
                let pp = format!("{path}.parts");
                let parts = self.array(self.field(obj, path, "parts")?, &pp)?;
                let parts = parts
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.hyper(x, &format!("{pp}[{i}]"), n))
                    .collect::<Result<Vec<_>>>()?;
                HRegion::union(parts).map_err(at)
            }
            other => Err(self.err(
                &format!("{path}.type"),
                format!("unknown region type '{other}'"),
            )),
        }
    }
}

/// Parses and validates a region document.
pub fn parse_region(src: &str) -> Result<AnyRegion> {
    let doc: Value = serde_json::from_str(src).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let ctx = Ctx {
        lines: value_lines(src),
    };
    let obj = ctx.object(&doc, "")?;
    let manifold = ctx
        .field(obj, "", "manifold")?
        .as_str()
        .ok_or_else(|| ctx.err("manifold", "expected a string"))?;
    let n = ctx
        .field(obj, "", "n")?
        .as_u64()
        .filter(|&n| n >= 1)
        .ok_or_else(|| ctx.err("n", "expected a positive integer"))? as usize;
    let region = ctx.field(obj, "", "region")?;
    match manifold {
        "sphere" => Ok(AnyRegion::Sphere(ctx.sphere(region, "region", n)?)),
        "hyperbolic" => Ok(AnyRegion::Hyper(ctx.hyper(region, "region", n)?)),
        other => Err(ctx.err(
            "manifold",
            format!("unknown manifold '{other}' (expected sphere or hyperbolic)"),
        )),
    }
}

fn sphere_value(r: &Region) -> Value {
    match r {
        Region::Cap(c) => {
            json!({"type": "cap", "center": c.center().coords(), "radius": c.radius()})
        }
        Region::Polygon(p) => json!({
            "type": "polygon",
            "vertices": p.vertices().iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
        }),
        Region::Union(v) => {
            json!({"type": "union", "parts": v.iter().map(sphere_value).collect::<Vec<_>>()})
        }
    }
}

fn hyper_value(r: &HRegion) -> Value {
    match r {
        HRegion::Cap(c) => {
            json!({"type": "cap", "center": c.center().coords(), "radius": c.radius()})
        }
        HRegion::Polygon(p) => json!({
            "type": "polygon",
            "vertices": p.vertices().iter().map(|v| v.coords().to_vec()).collect::<Vec<_>>(),
        }),
        HRegion::Intervals(s) => json!({
            "type": "intervals",
            "intervals": s.intervals().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        }),
        HRegion::Union(v) => {
            json!({"type": "union", "parts": v.iter().map(hyper_value).collect::<Vec<_>>()})
        }
    }
}

/// Document form of a region; round-trips through [`parse_region`].
pub fn region_to_json(r: &AnyRegion) -> Value {
    match r {
        AnyRegion::Sphere(s) => {
            json!({"manifold": "sphere", "n": s.dim(), "region": sphere_value(s)})
        }
        AnyRegion::Hyper(h) => {
            json!({"manifold": "hyperbolic", "n": h.dim(), "region": hyper_value(h)})
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_spherical_union() {
        let src = r#"{"manifold": "sphere", "n": 2,
            "region": {"type": "union", "parts": [
                {"type": "cap", "center": [0, 0, 1], "radius": 0.3},
                {"type": "polygon", "vertices": [[1, 0, 0], [0, 1, 0], [0.5, 0.5, 0.2]]}]}}"#;
        let r = parse_region(src).unwrap();
        assert!(matches!(r, AnyRegion::Sphere(Region::Union(ref v)) if v.len() == 2));
        let again = parse_region(&region_to_json(&r).to_string()).unwrap();
        assert_relative_eq!(again.measure(), r.measure(), epsilon = 1e-14);
    }

    #[test]
    fn parses_intervals() {
        let src = r#"{"manifold":"hyperbolic","n":1,"region":{"type":"intervals","intervals":[[-2,-1],[1,2]]}}"#;
        let r = parse_region(src).unwrap();
        assert_relative_eq!(r.measure(), 2.0);
    }

    #[test]
    fn errors_point_at_the_offending_line() {
        let src = "{\n  \"manifold\": \"sphere\",\n  \"n\": 2,\n  \"region\": {\n    \"type\": \"cap\",\n    \"center\": [0, 0, 1],\n    \"radius\": 4.0\n  }\n}";
        match parse_region(src) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 7);
                assert!(msg.contains("radius"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad_dim = "{\"manifold\": \"sphere\", \"n\": 2,\n\"region\": {\"type\": \"cap\",\n\"center\": [0, 1],\n\"radius\": 0.1}}";
        assert!(matches!(
            parse_region(bad_dim),
            Err(Error::Parse { line: 3, .. })
        ));
        let syntax = "{\n\"manifold\": \"sphere\",,\n}";
        assert!(matches!(
            parse_region(syntax),
            Err(Error::Parse { line: 2, .. })
        ));
        let unknown = r#"{"manifold":"torus","n":2,"region":{}}"#;
        assert!(matches!(parse_region(unknown), Err(Error::Parse { .. })));
    }
}
