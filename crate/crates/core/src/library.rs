//! Cell libraries: gate types with their boolean function, placement width,
//! worst-case delay and complement pairing.
//!
//! The text format is one gate type per line,
//! `NAME,FUNCTION,WIDTH,DELAY,COMPLEMENT`, where `FUNCTION` is an expression
//! over positional inputs (`nand(a,b)`, `nor(and(a,b),c)`, `mux(a,b,s)`,
//! `dff(a)`) and `COMPLEMENT` is another gate type or `-`. Inputs are
//! numbered by first appearance. Multi-output cells list one expression per
//! output separated by `;` (`dff(a);not(dff(a))` is a flop with Q and QN).
//! Lines starting with `#` are comments.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a gate type inside its library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Boolean function of one cell output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(usize),
    Const(bool),
    Not(Box<Expr>),
    Buf(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Nand(Vec<Expr>),
    Nor(Vec<Expr>),
    Xor(Vec<Expr>),
    Xnor(Vec<Expr>),
    /// `mux(a, b, s)` is `b` when `s` is high, `a` otherwise.
    Mux(Box<Expr>, Box<Expr>, Box<Expr>),
    /// Flop state sampled from the inner expression at the clock edge.
    Dff(Box<Expr>),
}

impl Expr {
    fn collect_vars(&self, out: &mut usize) {
        match self {
            Expr::Var(i) => *out = (*out).max(i + 1),
            Expr::Const(_) => {}
            Expr::Not(e) | Expr::Buf(e) | Expr::Dff(e) => e.collect_vars(out),
            Expr::And(v) | Expr::Or(v) | Expr::Nand(v) | Expr::Nor(v) | Expr::Xor(v) | Expr::Xnor(v) => {
                v.iter().for_each(|e| e.collect_vars(out))
            }
            Expr::Mux(a, b, s) => {
                a.collect_vars(out);
                b.collect_vars(out);
                s.collect_vars(out);
            }
        }
    }

    fn contains_dff(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Const(_) => false,
            Expr::Dff(_) => true,
            Expr::Not(e) | Expr::Buf(e) => e.contains_dff(),
            Expr::And(v) | Expr::Or(v) | Expr::Nand(v) | Expr::Nor(v) | Expr::Xor(v) | Expr::Xnor(v) => {
                v.iter().any(Expr::contains_dff)
            }
            Expr::Mux(a, b, s) => a.contains_dff() || b.contains_dff() || s.contains_dff(),
        }
    }

    /// Evaluate on bit-parallel words; `state` stands in for any `dff(..)`.
    pub fn eval(&self, inputs: &[u64], state: u64) -> u64 {
        fn fold(v: &[Expr], inputs: &[u64], state: u64, init: u64, f: fn(u64, u64) -> u64) -> u64 {
            v.iter().fold(init, |acc, e| f(acc, e.eval(inputs, state)))
        }
        match self {
            Expr::Var(i) => inputs[*i],
            Expr::Const(b) => {
                if *b {
                    !0
                } else {
                    0
                }
            }
            Expr::Not(e) => !e.eval(inputs, state),
            Expr::Buf(e) => e.eval(inputs, state),
            Expr::And(v) => fold(v, inputs, state, !0, |a, b| a & b),
            Expr::Or(v) => fold(v, inputs, state, 0, |a, b| a | b),
            Expr::Nand(v) => !fold(v, inputs, state, !0, |a, b| a & b),
            Expr::Nor(v) => !fold(v, inputs, state, 0, |a, b| a | b),
            Expr::Xor(v) => fold(v, inputs, state, 0, |a, b| a ^ b),
            Expr::Xnor(v) => !fold(v, inputs, state, 0, |a, b| a ^ b),
            Expr::Mux(a, b, s) => {
                let s = s.eval(inputs, state);
                (a.eval(inputs, state) & !s) | (b.eval(inputs, state) & s)
            }
            Expr::Dff(_) => state,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, name: &str, v: &[&Expr]) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, e) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")
        }
        fn refs(v: &[Expr]) -> Vec<&Expr> {
            v.iter().collect()
        }
        match self {
            Expr::Var(i) => write!(f, "{}", var_name(*i)),
            Expr::Const(b) => write!(f, "{}", u8::from(*b)),
            Expr::Not(e) => list(f, "not", &[e]),
            Expr::Buf(e) => list(f, "buf", &[e]),
            Expr::And(v) => list(f, "and", &refs(v)),
            Expr::Or(v) => list(f, "or", &refs(v)),
            Expr::Nand(v) => list(f, "nand", &refs(v)),
            Expr::Nor(v) => list(f, "nor", &refs(v)),
            Expr::Xor(v) => list(f, "xor", &refs(v)),
            Expr::Xnor(v) => list(f, "xnor", &refs(v)),
            Expr::Mux(a, b, s) => list(f, "mux", &[a, b, s]),
            Expr::Dff(e) => list(f, "dff", &[e]),
        }
    }
}

fn var_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("i{i}")
    }
}

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: Vec<String>,
}

impl<'a> ExprParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).to_lowercase())
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> std::result::Result<Expr, String> {
        let id = self.ident().ok_or_else(|| format!("expected expression at offset {}", self.pos))?;
        if !self.eat(b'(') {
            return match id.as_str() {
                "0" => Ok(Expr::Const(false)),
                "1" => Ok(Expr::Const(true)),
                _ if id.as_bytes()[0].is_ascii_alphabetic() => {
                    let idx = match self.vars.iter().position(|v| *v == id) {
                        Some(i) => i,
                        None => {
                            self.vars.push(id);
                            self.vars.len() - 1
                        }
                    };
                    Ok(Expr::Var(idx))
                }
                _ => Err(format!("bad operand `{id}`")),
            };
        }
        let mut args = Vec::new();
        if !self.eat(b')') {
            loop {
                args.push(self.expr()?);
                if self.eat(b')') {
                    break;
                }
                if !self.eat(b',') {
                    return Err(format!("expected `,` or `)` at offset {}", self.pos));
                }
            }
        }
        let unary = |mut args: Vec<Expr>, f: fn(Box<Expr>) -> Expr| {
            if args.len() != 1 {
                return Err(format!("`{id}` takes one argument"));
            }
            Ok(f(Box::new(args.pop().unwrap())))
        };
        let nary = |args: Vec<Expr>, f: fn(Vec<Expr>) -> Expr| {
            if args.is_empty() {
                return Err(format!("`{id}` needs arguments"));
            }
            Ok(f(args))
        };
        match id.as_str() {
            "not" | "inv" => unary(args, Expr::Not),
            "buf" => unary(args, Expr::Buf),
            "dff" => unary(args, Expr::Dff),
            "and" => nary(args, Expr::And),
            "or" => nary(args, Expr::Or),
            "nand" => nary(args, Expr::Nand),
            "nor" => nary(args, Expr::Nor),
            "xor" => nary(args, Expr::Xor),
            "xnor" => nary(args, Expr::Xnor),
            "mux" => {
                if args.len() != 3 {
                    return Err("`mux` takes three arguments".into());
                }
                let s = args.pop().unwrap();
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                Ok(Expr::Mux(Box::new(a), Box::new(b), Box::new(s)))
            }
            _ => Err(format!("unknown function `{id}`")),
        }
    }
}

/// Parse a `;`-separated list of output expressions sharing one input namespace.
pub fn parse_function(text: &str) -> std::result::Result<Vec<Expr>, String> {
    let mut p = ExprParser { src: text.as_bytes(), pos: 0, vars: Vec::new() };
    let mut outs = vec![p.expr()?];
    while p.eat(b';') {
        outs.push(p.expr()?);
    }
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(format!("trailing input at offset {}", p.pos));
    }
    Ok(outs)
}

/// Role of a gate type in the locking flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// Complement-paired combinational gate.
    Simple,
    /// Combinational gate without a complement in the library.
    Complex,
    Ff,
    Mux,
    Inv,
    Buf,
}

#[derive(Debug, Clone)]
pub struct GateType {
    pub name: String,
    pub outputs: Vec<Expr>,
    pub arity: usize,
    pub width: u32,
    pub delay: f64,
    pub complement: Option<TypeId>,
    pub kind: CellKind,
}

impl GateType {
    pub fn is_ff(&self) -> bool {
        self.kind == CellKind::Ff
    }

    /// Lockable in place: has a complement counterpart, or is a flop.
    pub fn is_lockable(&self) -> bool {
        self.is_ff() || (self.complement.is_some() && self.outputs.len() == 1)
    }

    /// For flops: whether each output is the inverted state.
    pub fn ff_output_inversion(&self) -> Vec<bool> {
        self.outputs.iter().map(|e| matches!(e, Expr::Not(_))).collect()
    }

    /// Truth table of output `out` over all inputs, with the flop state as
    /// the most significant variable for sequential types.
    pub fn truth_table(&self, out: usize) -> Vec<bool> {
        let vars = self.arity + usize::from(self.is_ff());
        let rows = 1usize << vars;
        (0..rows)
            .map(|row| {
                let inputs: Vec<u64> = (0..self.arity).map(|i| if row >> i & 1 == 1 { !0 } else { 0 }).collect();
                let state = if self.is_ff() && row >> self.arity & 1 == 1 { !0 } else { 0 };
                self.outputs[out].eval(&inputs, state) & 1 == 1
            })
            .collect()
    }

    pub fn function_text(&self) -> String {
        self.outputs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";")
    }
}

/// Validated set of gate types with the default locking cells designated.
#[derive(Debug, Clone)]
pub struct CellLibrary {
    types: Vec<GateType>,
    by_name: HashMap<String, TypeId>,
    inv: TypeId,
    mux: TypeId,
    ff: TypeId,
}

const BUILTIN: &str = include_str!("../data/default.lib");

/// Split on commas that are not nested inside parentheses.
fn split_top_level(line: &str) -> Vec<&str> {
    let mut fields = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in line.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                fields.push(line[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    fields.push(line[start..].trim());
    fields
}

fn classify(name: &str, outputs: &[Expr], has_complement: bool) -> Result<CellKind> {
    use Expr::*;
    let invalid = |msg: &str| Error::InvalidGateType(name.to_string(), msg.to_string());
    if outputs.iter().any(Expr::contains_dff) {
        let d = Dff(Box::new(Var(0)));
        for o in outputs {
            let ok = *o == d || *o == Not(Box::new(d.clone()));
            if !ok {
                return Err(invalid("flop outputs must be dff(a) or not(dff(a))"));
            }
        }
        return Ok(CellKind::Ff);
    }
    if outputs.len() == 1 {
        match &outputs[0] {
            Not(e) if **e == Var(0) => return Ok(CellKind::Inv),
            Buf(e) if **e == Var(0) => return Ok(CellKind::Buf),
            Var(0) => return Ok(CellKind::Buf),
            Mux(a, b, s) if **a == Var(0) && **b == Var(1) && **s == Var(2) => return Ok(CellKind::Mux),
            _ => {}
        }
    }
    Ok(if has_complement { CellKind::Simple } else { CellKind::Complex })
}

impl CellLibrary {
    /// The library bundled with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("bundled library is valid")
    }

    pub fn builtin_text() -> &'static str {
        BUILTIN
    }

    pub fn parse(text: &str) -> Result<Self> {
        struct Raw {
            name: String,
            outputs: Vec<Expr>,
            width: u32,
            delay: f64,
            complement: Option<String>,
        }
        let mut raws: Vec<Raw> = Vec::new();
        let mut by_name = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: lineno + 1, msg };
            let f = split_top_level(line);
            if f.len() != 5 {
                return Err(perr(format!("expected 5 fields, found {}", f.len())));
            }
            let name = f[0].to_string();
            if name.is_empty() {
                return Err(perr("empty gate type name".into()));
            }
            let outputs = parse_function(f[1]).map_err(|m| perr(format!("{name}: {m}")))?;
            let width: i64 = f[2].parse().map_err(|_| perr(format!("bad width `{}`", f[2])))?;
            if width < 1 {
                return Err(Error::InvalidGateType(name, format!("width {width} must be at least 1")));
            }
            let delay: f64 = f[3].parse().map_err(|_| perr(format!("bad delay `{}`", f[3])))?;
            if !(delay >= 0.0) || !delay.is_finite() {
                return Err(Error::InvalidGateType(name, format!("delay {delay} must be non-negative")));
            }
            let complement = (f[4] != "-" && !f[4].is_empty()).then(|| f[4].to_string());
            if by_name.insert(name.clone(), TypeId(raws.len() as u32)).is_some() {
                return Err(Error::DuplicateGateType(name));
            }
            raws.push(Raw { name, outputs, width: width as u32, delay, complement });
        }

        let mut types = Vec::with_capacity(raws.len());
        for raw in &raws {
            let complement = match &raw.complement {
                None => None,
                Some(c) => Some(*by_name.get(c).ok_or_else(|| Error::UnknownGateType(c.clone()))?),
            };
            let kind = classify(&raw.name, &raw.outputs, complement.is_some())?;
            let mut arity = 0;
            raw.outputs.iter().for_each(|e| e.collect_vars(&mut arity));
            types.push(GateType {
                name: raw.name.clone(),
                outputs: raw.outputs.clone(),
                arity,
                width: raw.width,
                delay: raw.delay,
                complement,
                kind,
            });
        }

        for t in &types {
            let Some(c) = t.complement else { continue };
            let other = &types[c.index()];
            if other.complement.map(|x| types[x.index()].name.as_str()) != Some(t.name.as_str()) {
                return Err(Error::AsymmetricComplement(t.name.clone(), other.name.clone()));
            }
            let compatible = t.outputs.len() == 1
                && other.outputs.len() == 1
                && t.arity == other.arity
                && t.is_ff() == other.is_ff();
            let inverse = compatible
                && t.truth_table(0).iter().zip(other.truth_table(0)).all(|(a, b)| *a != b);
            if !inverse {
                return Err(Error::NotComplementary(t.name.clone(), other.name.clone()));
            }
        }

        let pick = |pred: &dyn Fn(&GateType) -> bool| {
            types
                .iter()
                .enumerate()
                .filter(|(_, t)| pred(t))
                .min_by_key(|(i, t)| (t.width, *i))
                .map(|(i, _)| TypeId(i as u32))
        };
        let inv = pick(&|t| t.kind == CellKind::Inv).ok_or(Error::MissingDefaultCell("INV"))?;
        let mux = pick(&|t| t.kind == CellKind::Mux).ok_or(Error::MissingDefaultCell("MUX2"))?;
        let ff = pick(&|t| t.is_ff() && t.outputs == [Expr::Dff(Box::new(Expr::Var(0)))])
            .ok_or(Error::MissingDefaultCell("FF"))?;

        Ok(CellLibrary { types, by_name, inv, mux, ff })
    }

    pub fn get(&self, id: TypeId) -> &GateType {
        &self.types[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    pub fn types(&self) -> impl Iterator<Item = (TypeId, &GateType)> {
        self.types.iter().enumerate().map(|(i, t)| (TypeId(i as u32), t))
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn inv(&self) -> TypeId {
        self.inv
    }

    pub fn mux(&self) -> TypeId {
        self.mux
    }

    pub fn ff(&self) -> TypeId {
        self.ff
    }

    pub fn complement_of(&self, id: TypeId) -> Option<TypeId> {
        self.get(id).complement
    }

    pub fn width(&self, id: TypeId) -> u32 {
        self.get(id).width
    }

    pub fn delay(&self, id: TypeId) -> f64 {
        self.get(id).delay
    }

    /// Sites consumed by one locking instance: INV + MUX2 + key flop.
    pub fn instance_width(&self) -> u32 {
        self.width(self.inv) + self.width(self.mux) + self.width(self.ff)
    }

    /// Resolve a BENCH gate name: an exact library name first, then generic
    /// BENCH primitives (`NAND`, `NOT`, `DFF`, ...) by function and arity.
    pub fn resolve(&self, name: &str, arity: usize) -> Option<TypeId> {
        if let Some(id) = self.lookup(name) {
            return Some(id);
        }
        if let Some(id) = self.by_name.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| *v) {
            return Some(id);
        }
        let vars = || (0..arity).map(Expr::Var).collect::<Vec<_>>();
        let v0 = || Box::new(Expr::Var(0));
        let want = match name.to_ascii_uppercase().as_str() {
            "AND" => Expr::And(vars()),
            "OR" => Expr::Or(vars()),
            "NAND" => Expr::Nand(vars()),
            "NOR" => Expr::Nor(vars()),
            "XOR" => Expr::Xor(vars()),
            "XNOR" => Expr::Xnor(vars()),
            "NOT" | "INV" if arity == 1 => Expr::Not(v0()),
            "BUF" | "BUFF" if arity == 1 => Expr::Buf(v0()),
            "DFF" if arity == 1 => Expr::Dff(v0()),
            "MUX" if arity == 3 => Expr::Mux(v0(), Box::new(Expr::Var(1)), Box::new(Expr::Var(2))),
            _ => return None,
        };
        let matches = |t: &GateType| {
            t.outputs.len() == 1
                && t.arity == arity
                && (t.outputs[0] == want
                    || (matches!(want, Expr::Buf(_)) && t.outputs[0] == Expr::Var(0)))
        };
        self.types
            .iter()
            .enumerate()
            .filter(|(_, t)| matches(t))
            .min_by_key(|(i, t)| (t.width, *i))
            .map(|(i, _)| TypeId(i as u32))
    }

    /// Serialize back to the library text format.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# name,function,width,delay,complement\n");
        for t in &self.types {
            let comp = t.complement.map_or("-".to_string(), |c| self.get(c).name.clone());
            s += &format!("{},{},{},{},{}\n", t.name, t.function_text(), t.width, t.delay, comp);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = "\
INV,not(a),1,0.01,BUF
BUF,buf(a),1,0.02,INV
MUX2,mux(a,b,s),2,0.04,-
DFF,dff(a),4,0.08,-
";

    #[test]
    fn complement_pair_is_loaded() {
        let lib = CellLibrary::parse(&format!("{MINI}NAND2,nand(a,b),3,0.05,AND2\nAND2,and(a,b),3,0.06,NAND2\n")).unwrap();
        let nand = lib.lookup("NAND2").unwrap();
        let and = lib.lookup("AND2").unwrap();
        assert_eq!(lib.complement_of(nand), Some(and));
        assert_eq!(lib.complement_of(and), Some(nand));
        assert_eq!(lib.get(nand).kind, CellKind::Simple);
        assert_eq!(lib.get(nand).width, 3);
    }

    #[test]
    fn missing_inverter_is_rejected() {
        let text = "BUF,buf(a),1,0.02,-\nMUX2,mux(a,b,s),2,0.04,-\nDFF,dff(a),4,0.08,-\n";
        assert_eq!(CellLibrary::parse(text).unwrap_err(), Error::MissingDefaultCell("INV"));
    }

    #[test]
    fn mismatched_truth_tables_are_rejected() {
        // not(and) is nand, which differs from nor on input 01
        let text = format!("{MINI}AND2,and(a,b),3,0.05,NOR2\nNOR2,nor(a,b),3,0.05,AND2\n");
        assert!(matches!(CellLibrary::parse(&text), Err(Error::NotComplementary(..))));
    }

    #[test]
    fn asymmetric_complement_is_rejected() {
        let text = format!("{MINI}AND2,and(a,b),3,0.05,NAND2\nNAND2,nand(a,b),3,0.05,-\n");
        assert!(matches!(CellLibrary::parse(&text), Err(Error::AsymmetricComplement(..))));
    }

    #[test]
    fn duplicates_and_bad_numbers() {
        assert!(matches!(
            CellLibrary::parse(&format!("{MINI}INV,not(a),1,0.01,-\n")),
            Err(Error::DuplicateGateType(_))
        ));
        assert!(matches!(
            CellLibrary::parse(&format!("{MINI}X,and(a,b),-1,0.01,-\n")),
            Err(Error::InvalidGateType(..))
        ));
        assert!(matches!(
            CellLibrary::parse(&format!("{MINI}X,and(a,b),1,-0.5,-\n")),
            Err(Error::InvalidGateType(..))
        ));
    }

    #[test]
    fn builtin_library_is_consistent() {
        let lib = CellLibrary::builtin();
        assert_eq!(lib.get(lib.inv()).name, "INV");
        assert_eq!(lib.get(lib.mux()).name, "MUX2");
        assert_eq!(lib.get(lib.ff()).name, "DFF");
        for (id, t) in lib.types() {
            if let Some(c) = t.complement {
                assert_eq!(lib.complement_of(c), Some(id));
            }
            if t.kind == CellKind::Simple {
                assert!(t.complement.is_some());
            }
            if t.kind == CellKind::Complex {
                assert!(t.complement.is_none());
            }
        }
        let reparsed = CellLibrary::parse(&lib.to_text()).unwrap();
        assert_eq!(reparsed.len(), lib.len());
    }

    #[test]
    fn generic_bench_names_resolve_by_arity() {
        let lib = CellLibrary::builtin();
        assert_eq!(lib.resolve("NAND", 2), lib.lookup("NAND2"));
        assert_eq!(lib.resolve("nand", 3), lib.lookup("NAND3"));
        assert_eq!(lib.resolve("NOT", 1), lib.lookup("INV"));
        assert_eq!(lib.resolve("BUFF", 1), lib.lookup("BUF"));
        assert_eq!(lib.resolve("DFF", 1), lib.lookup("DFF"));
        assert_eq!(lib.resolve("NAND", 9), None);
    }

    #[test]
    fn function_grammar() {
        let f = parse_function("nor(and(x,y), z)").unwrap();
        assert_eq!(f[0].to_string(), "nor(and(a,b),c)");
        assert!(parse_function("frob(a)").is_err());
        assert!(parse_function("mux(a,b)").is_err());
        let ff = parse_function("dff(d);not(dff(d))").unwrap();
        assert_eq!(ff.len(), 2);
    }
}
