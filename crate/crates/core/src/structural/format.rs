//! Line-oriented truss input.
//!
//! One record per line, fields separated by whitespace, `#` starts a comment.
//! Lengths are mm, forces N, areas mm² unless noted.
//!
//! ```text
//! joint  <name> <x> <y> <z> [free | pinned | fix=<axes>]      axes: any of x, y, z
//! member <name> <joint> <joint> area=<mm²> yield=<MPa>
//!        [E=<MPa>] [cap_t=<N>] [cap_c=<N>] [density=<kg/m>] [group=base|skeleton]
//! anchor <x> <y>
//! case   <name>
//! load   <joint> <fx> <fy> <fz>
//! climb  <joint> static | dynamic                            250 lbf or 400 lbf down
//! wind   (speed=<m/s> | mph=<mph>) dir=<dx>,<dy>,<dz> [cd=<C_d>] [rho=<kg/m³>]
//! exposure <joint> <area m²>
//! gravity
//! ```
//!
//! Joints must be declared before members use them. `load`, `climb`, `wind`,
//! `exposure` and `gravity` apply to the most recent `case`; `exposure` needs a
//! `wind` record earlier in the same case.
//!
//! The same content is accepted as JSON in the shape of [`StructuralInput`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::truss::{Exposure, Joint, LoadCase, Member, MemberGroup, PointLoad, Restraint, TrussModel, WindLoad};
use super::units;
use super::StructuralError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StructuralInput {
    pub model: TrussModel,
    #[serde(default)]
    pub anchors: Vec<[f64; 2]>,
    #[serde(default)]
    pub cases: Vec<LoadCase>,
}

/// Parses JSON when the first non-blank character is `{`, the text grammar otherwise.
pub fn parse_structural(src: &str) -> Result<StructuralInput, StructuralError> {
    if src.trim_start().starts_with('{') {
        return serde_json::from_str(src).map_err(|e| StructuralError::Parse {
            line: e.line(),
            message: e.to_string(),
        });
    }
    parse_text(src)
}

struct Parser {
    input: StructuralInput,
    names: HashMap<String, usize>,
    line: usize,
}

impl Parser {
    fn err(&self, message: impl Into<String>) -> StructuralError {
        StructuralError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn num(&self, s: &str, what: &str) -> Result<f64, StructuralError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(format!("{what}: expected a number, got {s:?}")))
    }

    fn joint(&self, s: &str) -> Result<usize, StructuralError> {
        self.names.get(s).copied().ok_or_else(|| self.err(format!("unknown joint {s:?}")))
    }

    fn case(&mut self) -> Result<&mut LoadCase, StructuralError> {
        if self.input.cases.is_empty() {
            return Err(self.err("load record before any case"));
        }
        Ok(self.input.cases.last_mut().expect("checked"))
    }

    fn options<'a>(&self, fields: &'a [&'a str]) -> Result<Vec<(&'a str, &'a str)>, StructuralError> {
        fields
            .iter()
            .map(|f| f.split_once('=').ok_or_else(|| self.err(format!("expected key=value, got {f:?}"))))
            .collect()
    }

    fn record(&mut self, fields: &[&str]) -> Result<(), StructuralError> {
        match fields[0] {
            "joint" => {
                if fields.len() < 5 || fields.len() > 6 {
                    return Err(self.err("joint <name> <x> <y> <z> [support]"));
                }
                let name = fields[1].to_string();
                if self.names.contains_key(&name) {
                    return Err(self.err(format!("duplicate joint {name:?}")));
                }
                let position = [self.num(fields[2], "x")?, self.num(fields[3], "y")?, self.num(fields[4], "z")?];
                let restraint = match fields.get(5).copied() {
                    None | Some("free") => Restraint::FREE,
                    Some("pinned") => Restraint::PINNED,
                    Some(s) if s.starts_with("fix=") => {
                        let axes = &s[4..];
                        if axes.is_empty() || !axes.chars().all(|c| matches!(c, 'x' | 'y' | 'z')) {
                            return Err(self.err(format!("bad restraint {s:?}")));
                        }
                        Restraint([axes.contains('x'), axes.contains('y'), axes.contains('z')])
                    }
                    Some(s) => return Err(self.err(format!("unknown support {s:?}"))),
                };
                self.names.insert(name.clone(), self.input.model.joints.len());
                self.input.model.joints.push(Joint { name, position, restraint });
            }
            "member" => {
                if fields.len() < 4 {
                    return Err(self.err("member <name> <joint> <joint> area=.. yield=.."));
                }
                let (a, b) = (self.joint(fields[2])?, self.joint(fields[3])?);
                let mut m = Member::new(fields[1], a, b, f64::NAN, f64::NAN);
                for (k, v) in self.options(&fields[4..])? {
                    match k {
                        "area" => m.area_mm2 = self.num(v, k)?,
                        "yield" => m.yield_mpa = self.num(v, k)?,
                        "E" => m.modulus_mpa = self.num(v, k)?,
                        "cap_t" => m.capacity_tension_n = Some(self.num(v, k)?),
                        "cap_c" => m.capacity_compression_n = Some(self.num(v, k)?),
                        "density" => m.linear_density_kg_m = self.num(v, k)?,
                        "group" => {
                            m.group = match v {
                                "base" => MemberGroup::Base,
                                "skeleton" => MemberGroup::Skeleton,
                                _ => return Err(self.err(format!("unknown group {v:?}"))),
                            }
                        }
                        _ => return Err(self.err(format!("unknown member option {k:?}"))),
                    }
                }
                if m.area_mm2.is_nan() || m.yield_mpa.is_nan() {
                    return Err(self.err("member needs area= and yield="));
                }
                self.input.model.members.push(m);
            }
            "anchor" => {
                if fields.len() != 3 {
                    return Err(self.err("anchor <x> <y>"));
                }
                let p = [self.num(fields[1], "x")?, self.num(fields[2], "y")?];
                self.input.anchors.push(p);
            }
            "case" => {
                if fields.len() != 2 {
                    return Err(self.err("case <name>"));
                }
                self.input.cases.push(LoadCase::new(fields[1]));
            }
            "load" => {
                if fields.len() != 5 {
                    return Err(self.err("load <joint> <fx> <fy> <fz>"));
                }
                let joint = self.joint(fields[1])?;
                let force = [self.num(fields[2], "fx")?, self.num(fields[3], "fy")?, self.num(fields[4], "fz")?];
                self.case()?.point_loads.push(PointLoad { joint, force });
            }
            "climb" => {
                if fields.len() != 3 {
                    return Err(self.err("climb <joint> static|dynamic"));
                }
                let joint = self.joint(fields[1])?;
                let lbf = match fields[2] {
                    "static" => units::CLIMB_STATIC_LBF,
                    "dynamic" => units::CLIMB_DYNAMIC_LBF,
                    s => return Err(self.err(format!("unknown climb kind {s:?}"))),
                };
                let f = units::lbf_to_n(lbf);
                self.case()?.point_loads.push(PointLoad { joint, force: [0.0, 0.0, -f] });
            }
            "wind" => {
                let mut w = WindLoad {
                    speed_ms: f64::NAN,
                    drag_coefficient: units::DEFAULT_DRAG_COEFFICIENT,
                    air_density: units::SEA_LEVEL_AIR_DENSITY,
                    direction: [f64::NAN; 3],
                    exposures: Vec::new(),
                };
                for (k, v) in self.options(&fields[1..])? {
                    match k {
                        "speed" => w.speed_ms = self.num(v, k)?,
                        "mph" => w.speed_ms = units::mph_to_ms(self.num(v, k)?),
                        "cd" => w.drag_coefficient = self.num(v, k)?,
                        "rho" => w.air_density = self.num(v, k)?,
                        "dir" => {
                            let parts: Vec<&str> = v.split(',').collect();
                            if parts.len() != 3 {
                                return Err(self.err("dir=<dx>,<dy>,<dz>"));
                            }
                            for (slot, p) in w.direction.iter_mut().zip(&parts) {
                                *slot = self.num(p, "dir")?;
                            }
                        }
                        _ => return Err(self.err(format!("unknown wind option {k:?}"))),
                    }
                }
                if w.speed_ms.is_nan() || w.direction[0].is_nan() {
                    return Err(self.err("wind needs a speed and dir="));
                }
                self.case()?.wind = Some(w);
            }
            "exposure" => {
                if fields.len() != 3 {
                    return Err(self.err("exposure <joint> <area m²>"));
                }
                let joint = self.joint(fields[1])?;
                let area_m2 = self.num(fields[2], "area")?;
                let line = self.line;
                let case = self.case()?;
                match &mut case.wind {
                    Some(w) => w.exposures.push(Exposure { joint, area_m2 }),
                    None => {
                        return Err(StructuralError::Parse {
                            line,
                            message: "exposure before wind in this case".into(),
                        })
                    }
                }
            }
            "gravity" => self.case()?.gravity = true,
            other => return Err(self.err(format!("unknown record {other:?}"))),
        }
        Ok(())
    }
}

fn parse_text(src: &str) -> Result<StructuralInput, StructuralError> {
    let mut p = Parser {
        input: StructuralInput::default(),
        names: HashMap::new(),
        line: 0,
    };
    for (i, raw) in src.lines().enumerate() {
        p.line = i + 1;
        let text = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        p.record(&fields)?;
    }
    Ok(p.input)
}
