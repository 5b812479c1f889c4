use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    X,
    H,
    Sdg,
    Cx,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::Sdg => "SDG",
            GateKind::Cx => "CX",
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "RX" => GateKind::Rx,
            "RY" => GateKind::Ry,
            "RZ" => GateKind::Rz,
            "X" => GateKind::X,
            "H" => GateKind::H,
            "SDG" => GateKind::Sdg,
            "CX" => GateKind::Cx,
            other => return Err(Error::InvalidArgument(format!("unknown gate {other}"))),
        })
    }
}

/// Rotation angle: a constant or `scale * params[index] + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param {
        index: usize,
        scale: f64,
        offset: f64,
    },
}

impl Angle {
    pub fn param(index: usize) -> Angle {
        Angle::Param {
            index,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn scaled(index: usize, scale: f64) -> Angle {
        Angle::Param {
            index,
            scale,
            offset: 0.0,
        }
    }

    pub fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param {
                index,
                scale,
                offset,
            } => scale * params[index] + offset,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub angle: Option<Angle>,
}

impl Gate {
    /// 2x2 unitary of a single-qubit gate at the given angle.
    pub fn matrix(&self, theta: f64) -> [[Complex64; 2]; 2] {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let (s, c) = (theta / 2.0).sin_cos();
        match self.kind {
            GateKind::Rx => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            GateKind::Ry => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            GateKind::Rz => [
                [Complex64::from_polar(1.0, -theta / 2.0), z],
                [z, Complex64::from_polar(1.0, theta / 2.0)],
            ],
            GateKind::X => [[z, one], [one, z]],
            GateKind::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            GateKind::Sdg => [[one, z], [z, Complex64::new(0.0, -1.0)]],
            GateKind::Cx => [[one, z], [z, one]],
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.control.into_iter().chain(std::iter::once(self.target))
    }
}

/// Ordered gate list over a fixed register and parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_parameters: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_parameters: usize) -> Self {
        Circuit {
            n_qubits,
            n_parameters,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_parameters(&self) -> usize {
        self.n_parameters
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let check = |q: usize| {
            if q >= self.n_qubits {
                Err(Error::IndexOutOfRange {
                    index: q,
                    len: self.n_qubits,
                })
            } else {
                Ok(())
            }
        };
        check(gate.target)?;
        match (gate.kind, gate.control) {
            (GateKind::Cx, Some(c)) => {
                check(c)?;
                if c == gate.target {
                    return Err(Error::InvalidArgument("control equals target".into()));
                }
            }
            (GateKind::Cx, None) => {
                return Err(Error::InvalidArgument("CX needs a control".into()))
            }
            (_, Some(_)) => return Err(Error::InvalidArgument("only CX takes a control".into())),
            _ => {}
        }
        match (gate.kind.is_rotation(), gate.angle) {
            (true, None) => return Err(Error::InvalidArgument("rotation needs an angle".into())),
            (false, Some(_)) => {
                return Err(Error::InvalidArgument("fixed gate takes no angle".into()))
            }
            (true, Some(Angle::Param { index, .. })) if index >= self.n_parameters => {
                return Err(Error::IndexOutOfRange {
                    index,
                    len: self.n_parameters,
                })
            }
            _ => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    fn simple(&mut self, kind: GateKind, target: usize, angle: Option<Angle>) -> Result<&mut Self> {
        self.push(Gate {
            kind,
            target,
            control: None,
            angle,
        })?;
        Ok(self)
    }

    pub fn rx(&mut self, target: usize, angle: Angle) -> Result<&mut Self> {
        self.simple(GateKind::Rx, target, Some(angle))
    }

    pub fn ry(&mut self, target: usize, angle: Angle) -> Result<&mut Self> {
        self.simple(GateKind::Ry, target, Some(angle))
    }

    pub fn rz(&mut self, target: usize, angle: Angle) -> Result<&mut Self> {
        self.simple(GateKind::Rz, target, Some(angle))
    }

    pub fn x(&mut self, target: usize) -> Result<&mut Self> {
        self.simple(GateKind::X, target, None)
    }

    pub fn h(&mut self, target: usize) -> Result<&mut Self> {
        self.simple(GateKind::H, target, None)
    }

    pub fn sdg(&mut self, target: usize) -> Result<&mut Self> {
        self.simple(GateKind::Sdg, target, None)
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate {
            kind: GateKind::Cx,
            target,
            control: Some(control),
            angle: None,
        })?;
        Ok(self)
    }

    /// Appends every gate of `other`, which must act on the same register.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch(self.n_qubits, other.n_qubits));
        }
        for g in &other.gates {
            self.push(*g)?;
        }
        Ok(())
    }

    /// Copy with the angle of gate `gate_index` offset by `delta`.
    pub fn shifted(&self, gate_index: usize, delta: f64) -> Circuit {
        let mut c = self.clone();
        if let Some(a) = c.gates[gate_index].angle.as_mut() {
            *a = match *a {
                Angle::Fixed(v) => Angle::Fixed(v + delta),
                Angle::Param {
                    index,
                    scale,
                    offset,
                } => Angle::Param {
                    index,
                    scale,
                    offset: offset + delta,
                },
            };
        }
        c
    }

    /// Number of entangling gates.
    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Cx).count()
    }

    /// Circuit depth counting every gate as one time step.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n_qubits];
        for g in &self.gates {
            let d = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = d;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Text dump, one `GATE target [control] [param|angle]` line per gate.
    pub fn dump(&self) -> String {
        let mut out = format!(
            "# qubits {} parameters {}\n",
            self.n_qubits, self.n_parameters
        );
        for g in &self.gates {
            out.push_str(g.kind.name());
            out.push_str(&format!(" {}", g.target));
            if let Some(c) = g.control {
                out.push_str(&format!(" {c}"));
            }
            if let Some(a) = g.angle {
                out.push(' ');
                out.push_str(&angle_text(&a));
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Circuit::dump`] output.
    pub fn from_dump(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some(rest) = line.strip_prefix('#') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if let ["qubits", n, "parameters", p] = f.as_slice() {
                    let n = n.parse().map_err(|_| err("bad qubit count".into()))?;
                    let p = p.parse().map_err(|_| err("bad parameter count".into()))?;
                    circuit = Some(Circuit::new(n, p));
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let c = circuit
                .as_mut()
                .ok_or_else(|| err("missing `# qubits N parameters P` header".into()))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            let kind: GateKind = f[0].parse().map_err(|e: Error| err(e.to_string()))?;
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(format!("bad qubit \"{s}\"")))
            };
            let gate = match (kind, f.len()) {
                (GateKind::Cx, 3) => Gate {
                    kind,
                    target: num(f[1])?,
                    control: Some(num(f[2])?),
                    angle: None,
                },
                (k, 3) if k.is_rotation() => Gate {
                    kind,
                    target: num(f[1])?,
                    control: None,
                    angle: Some(
                        parse_angle(f[2]).ok_or_else(|| err(format!("bad angle \"{}\"", f[2])))?,
                    ),
                },
                (k, 2) if !k.is_rotation() && k != GateKind::Cx => Gate {
                    kind,
                    target: num(f[1])?,
                    control: None,
                    angle: None,
                },
                _ => return Err(err(format!("malformed gate line \"{line}\""))),
            };
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            msg: "empty circuit dump".into(),
        })
    }
}

fn angle_text(a: &Angle) -> String {
    match *a {
        Angle::Fixed(v) => format!("{v}"),
        Angle::Param {
            index,
            scale,
            offset,
        } => {
            let mut s = if scale == 1.0 {
                format!("p{index}")
            } else if scale == -1.0 {
                format!("-p{index}")
            } else {
                format!("{scale}*p{index}")
            };
            if offset != 0.0 {
                s.push_str(&format!("{offset:+}"));
            }
            s
        }
    }
}

fn parse_angle(s: &str) -> Option<Angle> {
    if let Ok(v) = s.parse::<f64>() {
        return Some(Angle::Fixed(v));
    }
    let p = s.find('p')?;
    let (head, tail) = (&s[..p], &s[p + 1..]);
    let scale = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.strip_suffix('*')?.parse().ok()?,
    };
    let split = tail.find(['+', '-']).unwrap_or(tail.len());
    let index = tail[..split].parse().ok()?;
    let offset = if split < tail.len() {
        tail[split..].parse().ok()?
    } else {
        0.0
    };
    Some(Angle::Param {
        index,
        scale,
        offset,
    })
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_gates_rejected() {
        let mut c = Circuit::new(2, 1);
        assert!(c.cx(1, 1).is_err());
        assert!(c.x(2).is_err());
        assert!(c.ry(0, Angle::param(1)).is_err());
        assert!(c
            .push(Gate {
                kind: GateKind::H,
                target: 0,
                control: None,
                angle: Some(Angle::Fixed(1.0))
            })
            .is_err());
        assert!(c.gates().is_empty());
    }

    #[test]
    fn dump_round_trip() {
        let mut c = Circuit::new(3, 2);
        c.ry(0, Angle::param(0)).unwrap();
        c.rz(2, Angle::scaled(1, -1.0)).unwrap();
        c.rx(1, Angle::Fixed(-std::f64::consts::FRAC_PI_2)).unwrap();
        c.cx(0, 1)
            .unwrap()
            .h(2)
            .unwrap()
            .sdg(1)
            .unwrap()
            .x(0)
            .unwrap();
        let c = c.shifted(0, 0.25);
        let text = c.dump();
        assert!(text.contains("RZ 2 -p1\n"));
        assert!(text.contains("CX 1 0\n"));
        assert_eq!(Circuit::from_dump(&text).unwrap(), c);
    }

    #[test]
    fn depth_counts_parallel_layers() {
        let mut c = Circuit::new(3, 0);
        c.h(0)
            .unwrap()
            .h(1)
            .unwrap()
            .h(2)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .x(2)
            .unwrap();
        assert_eq!(c.depth(), 2);
        assert_eq!(c.cx_count(), 1);
    }
}
