//! Line-based text formats: plants (`.des`), specification pairs
//! (`.pairs`) and policies (`.policy`). `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::automata::Plant;
use crate::error::{Error, Result};
use crate::labeled::{LabeledSystem, TransmitLabel};
use crate::property::DistinguishabilitySpec;
use crate::realization::Policy;

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn arity(line: usize, toks: &[&str], n: usize) -> Result<()> {
    if toks.len() != n {
        return Err(Error::parse(
            line,
            format!("`{}` takes {} argument(s)", toks[0], n - 1),
        ));
    }
    Ok(())
}

fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(line, other.to_string()),
    })
}

pub fn parse_des(text: &str) -> Result<Plant> {
    let mut states = Vec::new();
    let mut alphabet = Vec::new();
    let mut initial: Option<(usize, String)> = None;
    let mut trans = Vec::new();
    let mut last = 0;
    for (line, toks) in lines(text) {
        last = line;
        match toks[0] {
            "alphabet" => alphabet.extend(toks[1..].iter().map(|s| s.to_string())),
            "states" => states.extend(toks[1..].iter().map(|s| s.to_string())),
            "initial" => {
                arity(line, &toks, 2)?;
                if initial.is_some() {
                    return Err(Error::parse(line, "initial state given twice"));
                }
                initial = Some((line, toks[1].to_owned()));
            }
            "trans" => {
                arity(line, &toks, 4)?;
                trans.push((
                    line,
                    (toks[1].to_owned(), toks[2].to_owned(), toks[3].to_owned()),
                ));
            }
            kw => return Err(Error::parse(line, format!("unknown keyword `{kw}`"))),
        }
    }
    let (line, initial) = initial.ok_or_else(|| Error::parse(last.max(1), "missing `initial`"))?;
    for (line, (src, ev, dst)) in &trans {
        if let Some(bad) = [src, dst].into_iter().find(|q| !states.contains(q)) {
            return Err(Error::parse(*line, format!("undeclared state `{bad}`")));
        }
        if !alphabet.contains(ev) {
            return Err(Error::parse(*line, format!("undeclared event `{ev}`")));
        }
    }
    let trans: Vec<_> = trans.into_iter().map(|(_, t)| t).collect();
    at_line(line, Plant::new(&states, &alphabet, &initial, &trans))
}

pub fn write_des(plant: &Plant) -> String {
    let mut out = String::new();
    let names = |it: Vec<&str>| it.join(" ");
    let _ = writeln!(
        out,
        "alphabet {}",
        names(plant.events().map(|e| plant.event_name(e)).collect())
    );
    let _ = writeln!(
        out,
        "states {}",
        names(plant.states().map(|q| plant.state_name(q)).collect())
    );
    let _ = writeln!(out, "initial {}", plant.state_name(plant.initial()));
    for (q, e, t) in plant.transitions() {
        let _ = writeln!(
            out,
            "trans {} {} {}",
            plant.state_name(q),
            plant.event_name(e),
            plant.state_name(t)
        );
    }
    out
}

pub fn parse_pairs(text: &str, plant: &Plant) -> Result<DistinguishabilitySpec> {
    let mut pairs = Vec::new();
    for (line, toks) in lines(text) {
        match toks[0] {
            "pair" => {
                arity(line, &toks, 3)?;
                let a = at_line(line, plant.state_id(toks[1]))?;
                let b = at_line(line, plant.state_id(toks[2]))?;
                pairs.push((a, b));
            }
            kw => return Err(Error::parse(line, format!("unknown keyword `{kw}`"))),
        }
    }
    Ok(DistinguishabilitySpec::new(pairs))
}

pub fn write_pairs(spec: &DistinguishabilitySpec, plant: &Plant) -> String {
    spec.pairs()
        .iter()
        .map(|&(a, b)| format!("pair {} {}\n", plant.state_name(a), plant.state_name(b)))
        .collect()
}

pub fn parse_policy(text: &str, sys: &LabeledSystem) -> Result<Policy> {
    let g = sys.plant();
    let mut initial = None;
    let mut eta = BTreeMap::new();
    let mut labels = Vec::new();
    for (line, toks) in lines(text) {
        match toks[0] {
            "initial" => {
                arity(line, &toks, 2)?;
                if initial.is_some() {
                    return Err(Error::parse(line, "initial state given twice"));
                }
                initial = Some(at_line(line, sys.parse_state(toks[1]))?);
            }
            "label" => {
                arity(line, &toks, 4)?;
                let x = at_line(line, sys.parse_state(toks[1]))?;
                let e = at_line(line, g.event_id(toks[2]))?;
                let l = match toks[3] {
                    "Y" => TransmitLabel::Y,
                    "N" => TransmitLabel::N,
                    other => {
                        return Err(Error::parse(
                            line,
                            format!("label must be Y or N, not `{other}`"),
                        ))
                    }
                };
                if at_line(line, sys.label_of(x, e))? != l {
                    return Err(Error::parse(
                        line,
                        format!("label disagrees with the state `{}`", toks[1]),
                    ));
                }
                labels.push(x);
            }
            "trans" => {
                arity(line, &toks, 4)?;
                let x = at_line(line, sys.parse_state(toks[1]))?;
                let e = at_line(line, g.event_id(toks[2]))?;
                let t = at_line(line, sys.parse_state(toks[3]))?;
                if eta.insert((x, e), t).is_some_and(|prev| prev != t) {
                    return Err(Error::parse(line, "two targets for one policy edge"));
                }
            }
            kw => return Err(Error::parse(line, format!("unknown keyword `{kw}`"))),
        }
    }
    let initial = initial.ok_or_else(|| Error::parse(1, "missing `initial`"))?;
    let policy = Policy::new(sys, initial, eta)?;
    if let Some(x) = labels.iter().find(|x| !policy.states().contains(x)) {
        return Err(Error::InvalidPolicy(format!(
            "label given for `{}`, which is not a policy state",
            sys.render(*x)
        )));
    }
    Ok(policy)
}

pub fn write_policy(policy: &Policy, sys: &LabeledSystem) -> String {
    let g = sys.plant();
    let mut out = format!("initial {}\n", sys.render(policy.initial()));
    for &x in policy.states() {
        for (e, l) in sys.label_vector(x) {
            let _ = writeln!(out, "label {} {} {}", sys.render(x), g.event_name(e), l);
        }
    }
    for (x, e, t) in policy.transitions() {
        let _ = writeln!(
            out,
            "trans {} {} {}",
            sys.render(x),
            g.event_name(e),
            sys.render(t)
        );
    }
    out
}
