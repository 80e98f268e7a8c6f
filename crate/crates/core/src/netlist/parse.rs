use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use super::{
    AcSweep, Analysis, DcSweep, Element, ElementKind, Netlist, Probe, Quantity, GROUND,
};
use crate::device::StatzParams;
use crate::units::parse_number;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("line {line}: unknown element kind `{name}`")]
    UnknownElement { line: usize, name: String },
    #[error("line {line}: duplicate element name `{name}` (first defined on line {first})")]
    DuplicateName {
        line: usize,
        name: String,
        first: usize,
    },
    #[error("line {line}: {element} references undeclared model `{model}`")]
    UndeclaredModel {
        line: usize,
        element: String,
        model: String,
    },
    #[error("line {line}: directive references undeclared node `{node}`")]
    UndeclaredNode { line: usize, node: String },
    #[error("line {line}: directive references unknown element `{name}`")]
    UnknownReference { line: usize, name: String },
    #[error("no element is connected to ground node 0")]
    NoGround,
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    line: usize,
    col: usize,
}

impl Token {
    fn error(&self, reason: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.col,
            reason: reason.into(),
        }
    }

    fn number(&self, what: &str) -> Result<f64, ParseError> {
        parse_number(&self.text).map_err(|e| self.error(format!("bad {what}: {e}")))
    }
}

fn tokenize(text: &str, line: usize, col_offset: usize) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start = 0;
    for (col, ch) in text.chars().enumerate() {
        if ch.is_whitespace() || ch == ',' {
            if !current.is_empty() {
                tokens.push(Token {
                    text: std::mem::take(&mut current),
                    line,
                    col: start + col_offset + 1,
                });
            }
        } else {
            if current.is_empty() {
                start = col;
            }
            current.push(ch);
        }
    }
    if !current.is_empty() {
        tokens.push(Token {
            text: current,
            line,
            col: start + col_offset + 1,
        });
    }
    tokens
}

/// Joins `+` continuations and drops comments, returning token lists per statement.
fn statements(source: &str) -> Vec<Vec<Token>> {
    let mut out: Vec<Vec<Token>> = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split(';').next().unwrap_or("");
        let trimmed = body.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let lead = body.chars().count() - trimmed.chars().count();
        if let Some(rest) = trimmed.strip_prefix('+') {
            let tokens = tokenize(rest, line, lead + 1);
            match out.last_mut() {
                Some(prev) => prev.extend(tokens),
                None => out.push(tokens),
            }
        } else {
            out.push(tokenize(trimmed, line, lead));
        }
    }
    out
}

fn node_name(tok: &Token) -> String {
    let lower = tok.text.to_lowercase();
    if lower == "gnd" {
        GROUND.to_string()
    } else {
        lower
    }
}

/// Parses a circuit deck. The result satisfies every [`Netlist`] invariant.
pub fn parse(source: &str) -> Result<Netlist, ParseError> {
    let mut title = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut element_lines: Vec<usize> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut models = BTreeMap::new();
    let mut analyses = Vec::new();
    // directives are resolved after every element has been read
    let mut dc_refs: Vec<(Token, usize)> = Vec::new();
    let mut probe_tokens: Vec<Token> = Vec::new();

    for stmt in statements(source) {
        let Some(first) = stmt.first() else { continue };
        let head = first.text.to_lowercase();
        if let Some(directive) = head.strip_prefix('.') {
            match directive {
                "end" => break,
                "title" => {
                    let words: Vec<&str> = stmt[1..].iter().map(|t| t.text.as_str()).collect();
                    title = Some(words.join(" "));
                }
                "op" => analyses.push(Analysis::Op),
                "model" => {
                    let (name, params) = parse_model(&stmt)?;
                    models.insert(name, params);
                }
                "dc" => {
                    if stmt.len() != 5 {
                        return Err(first.error(".dc expects <source> <start> <stop> <step>"));
                    }
                    let start = stmt[2].number("sweep start")?;
                    let stop = stmt[3].number("sweep stop")?;
                    let step = stmt[4].number("sweep step")?;
                    if step <= 0.0 {
                        return Err(stmt[4].error("sweep step must be positive"));
                    }
                    if stop < start {
                        return Err(stmt[3].error("sweep stop is below sweep start"));
                    }
                    dc_refs.push((stmt[1].clone(), analyses.len()));
                    analyses.push(Analysis::Dc(DcSweep {
                        source: stmt[1].text.to_uppercase(),
                        start,
                        stop,
                        step,
                    }));
                }
                "ac" => analyses.push(Analysis::Ac(parse_ac(&stmt)?)),
                "probe" => probe_tokens.extend(stmt[1..].iter().cloned()),
                _ => return Err(first.error(format!("unsupported directive `{}`", first.text))),
            }
            continue;
        }

        let name = first.text.to_uppercase();
        let kind = parse_element(&name, &stmt)?;
        if let Some(&line) = seen.get(&name) {
            return Err(ParseError::DuplicateName {
                line: first.line,
                name,
                first: line,
            });
        }
        seen.insert(name.clone(), first.line);
        elements.push(Element { name, kind });
        element_lines.push(first.line);
    }

    for (e, &line) in elements.iter().zip(&element_lines) {
        if let ElementKind::Fet { model, .. } = &e.kind {
            if !models.contains_key(model) {
                return Err(ParseError::UndeclaredModel {
                    line,
                    element: e.name.clone(),
                    model: model.clone(),
                });
            }
        }
    }

    let nodes: BTreeSet<String> = elements
        .iter()
        .flat_map(|e| e.terminals())
        .map(str::to_string)
        .collect();
    if !nodes.contains(GROUND) {
        return Err(ParseError::NoGround);
    }

    for (tok, _) in &dc_refs {
        let upper = tok.text.to_uppercase();
        match elements.iter().find(|e| e.name == upper) {
            Some(e) if e.is_source() => {}
            Some(_) => return Err(tok.error(format!("`{}` is not a source", tok.text))),
            None => {
                return Err(ParseError::UnknownReference {
                    line: tok.line,
                    name: tok.text.clone(),
                })
            }
        }
    }

    let mut probes = Vec::new();
    for tok in probe_tokens {
        let probe = parse_probe(&tok)?;
        match probe.quantity {
            Quantity::Voltage => {
                if !nodes.contains(&probe.target) {
                    return Err(ParseError::UndeclaredNode {
                        line: tok.line,
                        node: probe.target,
                    });
                }
            }
            _ => {
                if !elements.iter().any(|e| e.name == probe.target) {
                    return Err(ParseError::UnknownReference {
                        line: tok.line,
                        name: probe.target,
                    });
                }
            }
        }
        probes.push(probe);
    }

    Ok(Netlist {
        title,
        nodes,
        elements,
        models,
        analyses,
        probes,
    })
}

fn expect_len(stmt: &[Token], n: usize, usage: &str) -> Result<(), ParseError> {
    if stmt.len() == n {
        Ok(())
    } else {
        let tok = stmt.get(n).unwrap_or(&stmt[stmt.len() - 1]);
        Err(tok.error(format!("expected `{usage}`")))
    }
}

fn positive(tok: &Token, what: &str) -> Result<f64, ParseError> {
    let v = tok.number(what)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(tok.error(format!("{what} must be positive")))
    }
}

fn parse_element(name: &str, stmt: &[Token]) -> Result<ElementKind, ParseError> {
    let first = &stmt[0];
    let pair = |a: &Token, b: &Token| [node_name(a), node_name(b)];
    let kind = match name.chars().next() {
        Some('R') => {
            expect_len(stmt, 4, "R<name> <n+> <n-> <ohms>")?;
            ElementKind::Resistor {
                nodes: pair(&stmt[1], &stmt[2]),
                ohms: positive(&stmt[3], "resistance")?,
            }
        }
        Some('C') => {
            expect_len(stmt, 4, "C<name> <n+> <n-> <farads>")?;
            ElementKind::Capacitor {
                nodes: pair(&stmt[1], &stmt[2]),
                farads: positive(&stmt[3], "capacitance")?,
            }
        }
        Some('L') => {
            expect_len(stmt, 4, "L<name> <n+> <n-> <henries>")?;
            ElementKind::Inductor {
                nodes: pair(&stmt[1], &stmt[2]),
                henries: positive(&stmt[3], "inductance")?,
            }
        }
        Some(c @ ('V' | 'I')) => {
            if stmt.len() < 3 {
                return Err(first.error("source needs two nodes"));
            }
            let (dc, ac) = parse_source_values(&stmt[3..])?;
            let nodes = pair(&stmt[1], &stmt[2]);
            if c == 'V' {
                ElementKind::VoltageSource { nodes, dc, ac }
            } else {
                ElementKind::CurrentSource { nodes, dc, ac }
            }
        }
        Some('G') => {
            expect_len(stmt, 6, "G<name> <n+> <n-> <nc+> <nc-> <gm>")?;
            ElementKind::Vccs {
                nodes: pair(&stmt[1], &stmt[2]),
                control: pair(&stmt[3], &stmt[4]),
                gm: stmt[5].number("transconductance")?,
            }
        }
        Some('J') => {
            expect_len(stmt, 5, "J<name> <drain> <gate> <source> <model>")?;
            let drain = node_name(&stmt[1]);
            let gate = node_name(&stmt[2]);
            if drain == gate {
                return Err(stmt[2].error("FET drain and gate must be distinct nodes"));
            }
            ElementKind::Fet {
                drain,
                gate,
                source: node_name(&stmt[3]),
                model: stmt[4].text.to_uppercase(),
            }
        }
        _ => {
            return Err(ParseError::UnknownElement {
                line: first.line,
                name: first.text.clone(),
            })
        }
    };
    Ok(kind)
}

fn parse_source_values(rest: &[Token]) -> Result<(f64, Option<f64>), ParseError> {
    let mut dc = None;
    let mut ac = None;
    let mut i = 0;
    while i < rest.len() {
        let tok = &rest[i];
        match tok.text.to_lowercase().as_str() {
            "dc" => {
                let v = rest
                    .get(i + 1)
                    .ok_or_else(|| tok.error("DC needs a value"))?;
                dc = Some(v.number("DC value")?);
                i += 2;
            }
            "ac" => match rest.get(i + 1).map(|t| (t, parse_number(&t.text))) {
                Some((_, Ok(mag))) => {
                    ac = Some(mag);
                    i += 2;
                }
                _ => {
                    ac = Some(1.0);
                    i += 1;
                }
            },
            _ if dc.is_none() && ac.is_none() => {
                dc = Some(tok.number("source value")?);
                i += 1;
            }
            _ => return Err(tok.error(format!("unexpected `{}` in source", tok.text))),
        }
    }
    Ok((dc.unwrap_or(0.0), ac))
}

fn parse_model(stmt: &[Token]) -> Result<(String, StatzParams), ParseError> {
    let first = &stmt[0];
    if stmt.len() < 3 {
        return Err(first.error(".model expects <name> STATZ <params>"));
    }
    let name = stmt[1].text.to_uppercase();
    // `STATZ(beta=...)` and `beta = 0.1` spellings are both accepted
    let mut kind_text = stmt[2].text.clone();
    let mut rest_text: Vec<String> = Vec::new();
    if let Some(pos) = kind_text.find('(') {
        rest_text.push(kind_text[pos + 1..].to_string());
        kind_text.truncate(pos);
    }
    if !kind_text.eq_ignore_ascii_case("statz") {
        return Err(stmt[2].error(format!(
            "unsupported model type `{kind_text}` (only STATZ)"
        )));
    }
    rest_text.extend(stmt[3..].iter().map(|t| t.text.clone()));
    let joined = rest_text.join(" ").replace(['(', ')'], " ");
    let mut compact = joined.clone();
    while compact.contains(" =") || compact.contains("= ") {
        compact = compact.replace(" =", "=").replace("= ", "=");
    }
    let anchor = stmt.get(3).unwrap_or(&stmt[2]);
    let mut values: HashMap<String, f64> = HashMap::new();
    for pair in compact.split_whitespace() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| anchor.error(format!("expected key=value, found `{pair}`")))?;
        let key = key.to_lowercase();
        if !matches!(
            key.as_str(),
            "beta" | "vto" | "lambda" | "alpha" | "cin" | "rin"
        ) {
            return Err(anchor.error(format!("unknown STATZ parameter `{key}`")));
        }
        let v = parse_number(value).map_err(|e| anchor.error(format!("bad {key}: {e}")))?;
        values.insert(key, v);
    }
    let required = |key: &str| {
        values
            .get(key)
            .copied()
            .ok_or_else(|| anchor.error(format!("model {name} is missing `{key}`")))
    };
    let params = StatzParams::new(
        required("beta")?,
        required("vto")?,
        values.get("lambda").copied().unwrap_or(StatzParams::DEFAULT_LAMBDA),
        values.get("alpha").copied().unwrap_or(StatzParams::DEFAULT_ALPHA),
        required("cin")?,
        required("rin")?,
    )
    .map_err(|e| anchor.error(format!("model {name}: {e}")))?;
    Ok((name, params))
}

fn parse_ac(stmt: &[Token]) -> Result<AcSweep, ParseError> {
    let first = &stmt[0];
    if stmt.len() != 5 {
        return Err(first.error(".ac expects dec <points> <fstart> <fstop>"));
    }
    if !stmt[1].text.eq_ignore_ascii_case("dec") {
        return Err(stmt[1].error("only `dec` AC sweeps are supported"));
    }
    let points = stmt[2].number("points per decade")?;
    if points < 1.0 || points.fract() != 0.0 {
        return Err(stmt[2].error("points per decade must be a positive integer"));
    }
    let f_start = positive(&stmt[3], "start frequency")?;
    let f_stop = positive(&stmt[4], "stop frequency")?;
    if f_stop <= f_start {
        return Err(stmt[4].error("stop frequency must exceed start frequency"));
    }
    Ok(AcSweep {
        points_per_decade: points as usize,
        f_start,
        f_stop,
    })
}

fn parse_probe(tok: &Token) -> Result<Probe, ParseError> {
    let text = &tok.text;
    let bad = || tok.error(format!("expected V(node), I(element) or P(element), found `{text}`"));
    let open = text.find('(').ok_or_else(bad)?;
    if !text.ends_with(')') || open != 1 {
        return Err(bad());
    }
    let inner = &text[2..text.len() - 1];
    if inner.is_empty() {
        return Err(bad());
    }
    let (quantity, target) = match text.as_bytes()[0].to_ascii_uppercase() {
        b'V' => {
            let lower = inner.to_lowercase();
            let node = if lower == "gnd" { GROUND.to_string() } else { lower };
            (Quantity::Voltage, node)
        }
        b'I' => (Quantity::Current, inner.to_uppercase()),
        b'P' => (Quantity::Power, inner.to_uppercase()),
        _ => return Err(bad()),
    };
    Ok(Probe { quantity, target })
}
