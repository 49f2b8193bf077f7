//! BENCH reader and writer.
//!
//! Accepted statements, one per line:
//!
//! ```text
//! INPUT(a)
//! OUTPUT(y)
//! y = NAND2(a, b)
//! q = DFF(d)
//! q, qn = DFF2(d)          # multi-output cell
//! y = MUX2(a, b, s)  # cell=u7
//! #@clock CK
//! ```
//!
//! Gate names are looked up in the library, falling back to the generic
//! BENCH primitives (`NAND`, `NOT`, `BUFF`, ...). A cell is named after its
//! first output net unless a trailing `# cell=<name>` comment says otherwise.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::library::CellLibrary;
use crate::netlist::Netlist;

enum Stmt {
    Input(String),
    Output(String),
    Gate { outs: Vec<String>, ty: String, ins: Vec<String>, cell: Option<String> },
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || "(),=".contains(c))
}

fn parse_line(raw: &str) -> std::result::Result<Option<Stmt>, String> {
    let (code, comment) = match raw.find('#') {
        Some(i) => (&raw[..i], Some(raw[i + 1..].trim())),
        None => (raw, None),
    };
    let code = code.trim();
    if code.is_empty() {
        return Ok(None);
    }
    let cell = comment.and_then(|c| c.strip_prefix("cell=")).map(|c| c.trim().to_string());

    let call = |s: &str| -> std::result::Result<(String, Vec<String>), String> {
        let open = s.find('(').ok_or("expected `(`")?;
        let close = s.rfind(')').ok_or("expected `)`")?;
        if close < open || !s[close + 1..].trim().is_empty() {
            return Err("malformed call".into());
        }
        let name = s[..open].trim().to_string();
        let inner = s[open + 1..close].trim();
        let args: Vec<String> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|a| a.trim().to_string()).collect()
        };
        if !is_name(&name) || args.iter().any(|a| !is_name(a)) {
            return Err(format!("bad identifier in `{s}`"));
        }
        Ok((name, args))
    };

    if let Some(eq) = code.find('=') {
        let outs: Vec<String> = code[..eq].split(',').map(|s| s.trim().to_string()).collect();
        if outs.iter().any(|o| !is_name(o)) {
            return Err("bad output name".into());
        }
        let (ty, ins) = call(code[eq + 1..].trim())?;
        return Ok(Some(Stmt::Gate { outs, ty, ins, cell }));
    }
    let (kw, args) = call(code)?;
    if args.len() != 1 {
        return Err(format!("`{kw}` takes one net"));
    }
    let net = args.into_iter().next().unwrap();
    match kw.to_ascii_uppercase().as_str() {
        "INPUT" => Ok(Some(Stmt::Input(net))),
        "OUTPUT" => Ok(Some(Stmt::Output(net))),
        _ => Err(format!("unknown statement `{kw}`")),
    }
}

/// Parse BENCH text into a validated netlist.
pub fn parse_netlist(text: &str, lib: Arc<CellLibrary>) -> Result<Netlist> {
    let mut stmts = Vec::new();
    let mut clock = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.trim().strip_prefix("#@clock") {
            clock = Some(c.trim().to_string());
            continue;
        }
        match parse_line(line) {
            Ok(Some(s)) => stmts.push((i + 1, s)),
            Ok(None) => {}
            Err(msg) => return Err(Error::Parse { line: i + 1, msg }),
        }
    }

    let mut n = Netlist::new(lib.clone());
    if let Some(c) = clock {
        n.set_clock(c);
    }
    for (_, s) in &stmts {
        if let Stmt::Input(name) = s {
            n.add_pi(name)?;
        }
    }
    for (line, s) in &stmts {
        if let Stmt::Gate { outs, ty, ins, cell } = s {
            let tid = lib.resolve(ty, ins.len()).ok_or_else(|| Error::UnknownGateType(ty.clone()))?;
            let t = lib.get(tid);
            if t.arity != ins.len() || t.outputs.len() != outs.len() {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("`{ty}` expects {} inputs and {} outputs", t.arity, t.outputs.len()),
                });
            }
            let name = cell.clone().unwrap_or_else(|| outs[0].clone());
            let ins: Vec<&str> = ins.iter().map(String::as_str).collect();
            let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
            n.add_cell_by_names(&name, tid, &ins, &outs)?;
        }
    }
    for (_, s) in &stmts {
        if let Stmt::Output(name) = s {
            n.add_po(name);
        }
    }
    n.validate()?;
    Ok(n)
}

/// Serialize a netlist to BENCH text that [`parse_netlist`] reads back.
pub fn write_netlist(n: &Netlist) -> String {
    let mut s = String::new();
    let net = |id: crate::netlist::NetId| n.net(id).name.as_str();
    for &pi in n.pis() {
        let _ = writeln!(s, "INPUT({})", net(pi));
    }
    for &po in n.pos() {
        let _ = writeln!(s, "OUTPUT({})", net(po));
    }
    if n.ffs().next().is_some() {
        let _ = writeln!(s, "#@clock {}", n.clock());
    }
    for (_, c) in n.cells() {
        let outs: Vec<&str> = c.outputs.iter().map(|&o| net(o)).collect();
        let ins: Vec<&str> = c.inputs.iter().map(|&i| net(i)).collect();
        let _ = write!(s, "{} = {}({})", outs.join(", "), n.library().get(c.ty).name, ins.join(", "));
        if c.name != outs[0] {
            let _ = write!(s, "  # cell={}", c.name);
        }
        s.push('\n');
    }
    s
}
