//! Label lists to state indices.

use itflow::GroupSpec;

use crate::failure::{Failure, Outcome};

/// Indices named by a comma-separated list, in state order. `PREFIX/*`
/// selects every label starting with `PREFIX/`.
pub fn resolve(spec: &str, labels: &[String]) -> Outcome<Vec<usize>> {
    let mut picked = vec![false; labels.len()];
    for token in spec.split(',').map(str::trim) {
        if token.is_empty() {
            return Err(Failure::validation(format!("empty label in {spec:?}")));
        }
        if token == "*" {
            return Err(Failure::validation(
                "`*` must be the whole list on one side".to_string(),
            ));
        }
        let hits: Vec<usize> = match token.strip_suffix('*') {
            Some(prefix) => (0..labels.len())
                .filter(|&k| labels[k].starts_with(prefix))
                .collect(),
            None => labels.iter().position(|l| l == token).into_iter().collect(),
        };
        if hits.is_empty() {
            return Err(Failure::validation(format!(
                "label {token:?} matches no state; known labels: {}",
                labels.join(", ")
            )));
        }
        for k in hits {
            picked[k] = true;
        }
    }
    Ok((0..labels.len()).filter(|&k| picked[k]).collect())
}

/// Disjoint source and target sets; either side may be `*` for "all others".
pub fn resolve_pair(from: &str, to: &str, labels: &[String]) -> Outcome<(Vec<usize>, Vec<usize>)> {
    let rest = |of: &[usize]| {
        (0..labels.len())
            .filter(|k| !of.contains(k))
            .collect::<Vec<_>>()
    };
    let (src, tgt) = match (from.trim(), to.trim()) {
        ("*", "*") => return Err(Failure::validation("source and target cannot both be `*`")),
        ("*", t) => {
            let t = resolve(t, labels)?;
            (rest(&t), t)
        }
        (s, "*") => {
            let s = resolve(s, labels)?;
            let t = rest(&s);
            (s, t)
        }
        (s, t) => (resolve(s, labels)?, resolve(t, labels)?),
    };
    if let Some(&k) = src.iter().find(|k| tgt.contains(k)) {
        return Err(Failure::validation(format!(
            "{} is both source and target",
            labels[k]
        )));
    }
    if src.is_empty() || tgt.is_empty() {
        return Err(Failure::validation(format!(
            "{from:?} -> {to:?} leaves one side empty"
        )));
    }
    Ok((src, tgt))
}

/// `SOURCE->TARGET`.
pub fn split_arrow(spec: &str) -> Outcome<(&str, &str)> {
    spec.split_once("->").ok_or_else(|| {
        Failure::validation(format!(
            "transfer {spec:?} is not of the form SOURCE->TARGET"
        ))
    })
}

/// `NAME=labels` definitions, which must not overlap.
pub fn parse_groups(defs: &[String], labels: &[String]) -> Outcome<GroupSpec> {
    let mut groups = Vec::with_capacity(defs.len());
    for def in defs {
        let (name, spec) = def.split_once('=').ok_or_else(|| {
            Failure::validation(format!("group {def:?} is not of the form NAME=labels"))
        })?;
        groups.push((name.trim().to_string(), resolve(spec, labels)?));
    }
    Ok(GroupSpec::new(labels.len(), groups)?)
}
