//! Reader and writer for MATPOWER-style `.m` case files.
//!
//! Only the numeric bodies of `mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
//! `mpc.branch` and `mpc.gencost` are read; everything else is ignored.

use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Branch, Bus, BusKind, Generator, Load, Network, QuadraticCost};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Cell {
    value: f64,
    line: usize,
    column: usize,
}

type Row = Vec<Cell>;

#[derive(Debug)]
struct Matrix {
    line: usize,
    rows: Vec<Row>,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits `text` into numeric tokens, recording 1-based columns.
fn tokens(text: &str, line: usize, offset: usize) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    let mut start = None;
    let push = |s: usize, e: usize, out: &mut Vec<Cell>| -> Result<()> {
        let tok = &text[s..e];
        let value = match tok {
            "Inf" | "inf" => f64::INFINITY,
            "-Inf" | "-inf" => f64::NEG_INFINITY,
            _ => tok.parse::<f64>().map_err(|_| {
                parse_err(line, offset + s + 1, format!("malformed number '{tok}'"))
            })?,
        };
        out.push(Cell {
            value,
            line,
            column: offset + s + 1,
        });
        Ok(())
    };
    for (i, c) in text.char_indices() {
        let sep = c.is_whitespace() || c == ',';
        match (sep, start) {
            (true, Some(s)) => {
                push(s, i, &mut out)?;
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        push(s, text.len(), &mut out)?;
    }
    Ok(out)
}

/// Collects every `mpc.<name> = ...` assignment.
fn scan(text: &str) -> Result<(HashMap<String, Matrix>, HashMap<String, Cell>)> {
    let mut matrices = HashMap::new();
    let mut scalars = HashMap::new();
    let mut open: Option<(String, Matrix, Row)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);

        let (body, body_offset) = match open {
            Some(_) => (line, 0),
            None => {
                let Some(pos) = line.find("mpc.") else { continue };
                let rest = &line[pos + 4..];
                let Some(eq) = rest.find('=') else { continue };
                let name = rest[..eq].trim().to_string();
                let rhs_offset = pos + 4 + eq + 1;
                let rhs = &line[rhs_offset..];
                if let Some(b) = rhs.find('[') {
                    open = Some((
                        name,
                        Matrix {
                            line: lineno,
                            rows: Vec::new(),
                        },
                        Vec::new(),
                    ));
                    (&rhs[b + 1..], rhs_offset + b + 1)
                } else {
                    let value = rhs.trim().trim_end_matches(';').trim();
                    if value.starts_with('\'') {
                        continue;
                    }
                    let col = rhs_offset + rhs.find(|c: char| !c.is_whitespace()).unwrap_or(0) + 1;
                    let v = value
                        .parse::<f64>()
                        .map_err(|_| parse_err(lineno, col, format!("malformed value for mpc.{name}")))?;
                    scalars.insert(
                        name,
                        Cell {
                            value: v,
                            line: lineno,
                            column: col,
                        },
                    );
                    continue;
                }
            }
        };

        let (content, closes) = match body.find(']') {
            Some(e) => (&body[..e], true),
            None => (body, false),
        };
        let (_, matrix, row) = open.as_mut().expect("matrix open");
        let mut seg_start = 0;
        for (i, c) in content.char_indices().chain(std::iter::once((content.len(), ';'))) {
            if c == ';' {
                row.extend(tokens(&content[seg_start..i], lineno, body_offset + seg_start)?);
                if !row.is_empty() {
                    matrix.rows.push(std::mem::take(row));
                }
                seg_start = i + 1;
            }
        }
        if closes {
            let (name, matrix, _) = open.take().expect("matrix open");
            matrices.insert(name, matrix);
        }
    }
    if let Some((name, m, _)) = open {
        return Err(parse_err(m.line, 1, format!("unterminated matrix mpc.{name}")));
    }
    Ok((matrices, scalars))
}

fn need<'a>(m: &'a HashMap<String, Matrix>, name: &str, last_line: usize) -> Result<&'a Matrix> {
    m.get(name)
        .ok_or_else(|| parse_err(last_line, 1, format!("missing mpc.{name}")))
}

fn check_width(row: &Row, min: usize, what: &str, matrix: &Matrix) -> Result<()> {
    if row.len() < min {
        let (line, column) = row
            .last()
            .map(|c| (c.line, c.column))
            .unwrap_or((matrix.line, 1));
        return Err(parse_err(
            line,
            column,
            format!("{what} row has {} columns, expected at least {min}", row.len()),
        ));
    }
    Ok(())
}

fn as_index(c: &Cell) -> Result<usize> {
    if c.value < 0.0 || c.value.fract() != 0.0 || !c.value.is_finite() {
        return Err(parse_err(c.line, c.column, format!("expected an integer, got {}", c.value)));
    }
    Ok(c.value as usize)
}

fn resolve(numbers: &HashMap<usize, usize>, c: &Cell, what: &str) -> Result<usize> {
    let n = as_index(c)?;
    numbers.get(&n).copied().ok_or_else(|| {
        Error::Validation(format!(
            "{what} at line {}, column {} references unknown bus {n}",
            c.line, c.column
        ))
    })
}

/// Parses a MATPOWER case file into a validated [`Network`].
pub fn parse_case(text: &str) -> Result<Network> {
    let (matrices, scalars) = scan(text)?;
    let last = text.lines().count().max(1);
    let base_mva = scalars.get("baseMVA").map(|c| c.value).unwrap_or(100.0);
    if base_mva <= 0.0 {
        let c = scalars["baseMVA"];
        return Err(parse_err(c.line, c.column, "baseMVA must be positive"));
    }

    let bus_m = need(&matrices, "bus", last)?;
    let mut buses = Vec::with_capacity(bus_m.rows.len());
    let mut loads = Vec::new();
    let mut numbers = HashMap::new();
    for (id, row) in bus_m.rows.iter().enumerate() {
        check_width(row, 13, "bus", bus_m)?;
        let number = as_index(&row[0])?;
        if numbers.insert(number, id).is_some() {
            return Err(parse_err(row[0].line, row[0].column, format!("duplicate bus number {number}")));
        }
        let kind = match row[1].value as i64 {
            1 => BusKind::Pq,
            2 => BusKind::Pv,
            3 => BusKind::Slack,
            t => {
                return Err(parse_err(row[1].line, row[1].column, format!("unsupported bus type {t}")))
            }
        };
        let (pd, qd) = (row[2].value, row[3].value);
        if pd != 0.0 || qd != 0.0 {
            loads.push(Load {
                bus: id,
                demand: Complex64::new(pd / base_mva, qd / base_mva),
            });
        }
        buses.push(Bus {
            id,
            number,
            kind,
            v_min: row[12].value,
            v_max: row[11].value,
            base_kv: row[9].value,
            shunt_admittance: Complex64::new(row[4].value / base_mva, row[5].value / base_mva),
            vm: row[7].value,
            va: row[8].value.to_radians(),
        });
    }

    let gen_m = need(&matrices, "gen", last)?;
    let cost_m = matrices.get("gencost");
    let mut generators = Vec::with_capacity(gen_m.rows.len());
    for (i, row) in gen_m.rows.iter().enumerate() {
        check_width(row, 10, "gen", gen_m)?;
        let cost = match cost_m {
            Some(m) => {
                let crow = m.rows.get(i).ok_or_else(|| {
                    parse_err(m.line, 1, format!("gencost has no row for generator {}", i + 1))
                })?;
                parse_cost(crow, m)?
            }
            None => QuadraticCost::default(),
        };
        generators.push(Generator {
            bus: resolve(&numbers, &row[0], "generator")?,
            p_set: row[1].value / base_mva,
            q_set: row[2].value / base_mva,
            q_max: row[3].value / base_mva,
            q_min: row[4].value / base_mva,
            v_set: row[5].value,
            in_service: row[7].value > 0.0,
            p_max: row[8].value / base_mva,
            p_min: row[9].value / base_mva,
            cost,
        });
    }

    let br_m = need(&matrices, "branch", last)?;
    let mut branches = Vec::with_capacity(br_m.rows.len());
    for row in &br_m.rows {
        check_width(row, 11, "branch", br_m)?;
        let tap = if row[8].value == 0.0 { 1.0 } else { row[8].value };
        let (amin, amax) = if row.len() >= 13 {
            (row[11].value, row[12].value)
        } else {
            (-360.0, 360.0)
        };
        branches.push(Branch {
            from_bus: resolve(&numbers, &row[0], "branch")?,
            to_bus: resolve(&numbers, &row[1], "branch")?,
            r: row[2].value,
            x: row[3].value,
            b: row[4].value,
            s_max: row[5].value / base_mva,
            tap,
            shift: row[9].value.to_radians(),
            in_service: row[10].value > 0.0,
            angle_diff_min: amin.to_radians(),
            angle_diff_max: amax.to_radians(),
        });
    }

    let net = Network {
        base_mva,
        buses,
        branches,
        generators,
        loads,
    };
    net.validate()?;
    Ok(net)
}

fn parse_cost(row: &Row, m: &Matrix) -> Result<QuadraticCost> {
    check_width(row, 4, "gencost", m)?;
    if row[0].value != 2.0 {
        return Err(parse_err(
            row[0].line,
            row[0].column,
            "only polynomial cost curves (model 2) are supported",
        ));
    }
    let n = as_index(&row[3])?;
    check_width(row, 4 + n, "gencost", m)?;
    let coeffs: Vec<f64> = row[4..4 + n].iter().map(|c| c.value).collect();
    // highest order first
    let mut c = [0.0; 3];
    for (k, v) in coeffs.iter().rev().enumerate() {
        if k < 3 {
            c[k] = *v;
        } else if *v != 0.0 {
            let cell = row[4 + n - 1 - k];
            return Err(parse_err(cell.line, cell.column, "cost polynomials above degree 2 are not supported"));
        }
    }
    Ok(QuadraticCost {
        c2: c[2],
        c1: c[1],
        c0: c[0],
    })
}

/// Shortest decimal that maps back to exactly `target` through `back`.
fn exact(guess: f64, target: f64, back: impl Fn(f64) -> f64) -> String {
    if back(guess) == target {
        return format!("{guess}");
    }
    let mut up = guess;
    let mut down = guess;
    for _ in 0..8 {
        up = up.next_up();
        down = down.next_down();
        if back(up) == target {
            return format!("{up}");
        }
        if back(down) == target {
            return format!("{down}");
        }
    }
    format!("{guess}")
}

fn scaled(v: f64, base: f64) -> String {
    exact(v * base, v, |d| format!("{d}").parse::<f64>().unwrap() / base)
}

fn degrees(rad: f64) -> String {
    exact(rad.to_degrees(), rad, |d| format!("{d}").parse::<f64>().unwrap().to_radians())
}

/// Serialises a network to MATPOWER case text that parses back to an
/// identical [`Network`].
pub fn write_case(net: &Network) -> String {
    let base = net.base_mva;
    let demand = net.bus_demand();
    let mut s = String::new();
    s.push_str("function mpc = case_export\nmpc.version = '2';\n");
    let _ = writeln!(s, "mpc.baseMVA = {base};\n");

    s.push_str("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\nmpc.bus = [\n");
    for b in &net.buses {
        let t = match b.kind {
            BusKind::Pq => 1,
            BusKind::Pv => 2,
            BusKind::Slack => 3,
        };
        let d = demand[b.id];
        let _ = writeln!(
            s,
            "\t{}\t{t}\t{}\t{}\t{}\t{}\t1\t{}\t{}\t{}\t1\t{}\t{};",
            b.number,
            scaled(d.re, base),
            scaled(d.im, base),
            scaled(b.shunt_admittance.re, base),
            scaled(b.shunt_admittance.im, base),
            b.vm,
            degrees(b.va),
            b.base_kv,
            b.v_max,
            b.v_min
        );
    }
    s.push_str("];\n\n");

    s.push_str("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\nmpc.gen = [\n");
    for g in &net.generators {
        let _ = writeln!(
            s,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{base}\t{}\t{}\t{};",
            net.buses[g.bus].number,
            scaled(g.p_set, base),
            scaled(g.q_set, base),
            scaled(g.q_max, base),
            scaled(g.q_min, base),
            g.v_set,
            u8::from(g.in_service),
            scaled(g.p_max, base),
            scaled(g.p_min, base)
        );
    }
    s.push_str("];\n\n");

    s.push_str("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\nmpc.branch = [\n");
    for br in &net.branches {
        let rate = scaled(br.s_max, base);
        let _ = writeln!(
            s,
            "\t{}\t{}\t{}\t{}\t{}\t{rate}\t{rate}\t{rate}\t{}\t{}\t{}\t{}\t{};",
            net.buses[br.from_bus].number,
            net.buses[br.to_bus].number,
            br.r,
            br.x,
            br.b,
            br.tap,
            degrees(br.shift),
            u8::from(br.in_service),
            degrees(br.angle_diff_min),
            degrees(br.angle_diff_max)
        );
    }
    s.push_str("];\n\n");

    s.push_str("mpc.gencost = [\n");
    for g in &net.generators {
        let _ = writeln!(s, "\t2\t0\t0\t3\t{}\t{}\t{};", g.cost.c2, g.cost.c1, g.cost.c0);
    }
    s.push_str("];\n");
    s
}
