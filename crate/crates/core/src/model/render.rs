//! Deterministic serializer; `parse(serialize(m))` is structurally `m`.

use num_traits::{One, Signed, Zero};

use super::ModelSource;
use crate::pta::{Guard, ParamExpr, ParamRole, Pta};
use crate::rational::{render_rat, Rat};

pub fn serialize(pta: &Pta) -> String {
    let source = ModelSource {
        name: pta.name.clone(),
        sync: Default::default(),
        components: vec![pta.clone()],
    };
    serialize_source(&source)
}

pub fn serialize_source(source: &ModelSource) -> String {
    let mut out = String::new();
    out.push_str(&format!("pta {}\n\n", source.name));
    if !source.sync.is_empty() {
        let list: Vec<&str> = source.sync.iter().map(|s| s.as_str()).collect();
        out.push_str(&format!("sync {};\n", list.join(", ")));
    }
    let mut clocks: Vec<&str> = Vec::new();
    let mut params: Vec<(&str, ParamRole)> = Vec::new();
    let mut bools: Vec<(&str, bool)> = Vec::new();
    for c in &source.components {
        for name in &c.clocks {
            if !clocks.contains(&name.as_str()) {
                clocks.push(name);
            }
        }
        for (name, role) in &c.params {
            if !params.iter().any(|(n, _)| n == name) {
                params.push((name, *role));
            }
        }
        for (name, init) in &c.discretes {
            if !bools.iter().any(|(n, _)| n == name) {
                bools.push((name, *init));
            }
        }
    }
    if !clocks.is_empty() {
        out.push_str(&format!("clock {};\n", clocks.join(", ")));
    }
    for (name, role) in params {
        match role {
            ParamRole::Shared => out.push_str(&format!("param {name};\n")),
            ParamRole::Input => out.push_str(&format!("param {name}: input;\n")),
        }
    }
    for (name, init) in bools {
        out.push_str(&format!("bool {name} = {init};\n"));
    }
    for pta in &source.components {
        out.push('\n');
        render_automaton(pta, &mut out);
    }
    out
}

fn render_automaton(pta: &Pta, out: &mut String) {
    out.push_str(&format!("automaton {} {{\n", pta.name));
    for (id, loc) in pta.locations.iter().enumerate() {
        let mut head = String::from("  ");
        if id == pta.initial {
            head.push_str("init ");
        }
        if loc.private {
            head.push_str("private ");
        }
        head.push_str(&format!("loc {}", loc.name));
        if !loc.invariant.is_empty() {
            let atoms: Vec<String> = loc
                .invariant
                .iter()
                .map(|a| {
                    format!(
                        "{} {} {}",
                        pta.clocks[a.clock],
                        a.rel.as_str(),
                        render_expr(pta, &a.bound)
                    )
                })
                .collect();
            head.push_str(&format!(": invariant {}", atoms.join(" && ")));
        }
        out.push_str(&head);
        out.push_str(" {\n");
        for edge in pta.edges.iter().filter(|e| e.source == id) {
            let mut line = String::from("    ");
            if edge.private {
                line.push_str("private ");
            }
            line.push_str(&format!("when {}", render_guard(pta, &edge.guard)));
            if let Some(a) = edge.action {
                line.push_str(&format!(" sync {}", pta.actions[a]));
            }
            let mut updates: Vec<String> = Vec::new();
            for &clock in &edge.resets {
                updates.push(format!("{} := 0", pta.clocks[clock]));
            }
            for (d, v) in &edge.bool_updates {
                updates.push(format!("{} := {}", pta.discretes[*d].0, v));
            }
            if !updates.is_empty() {
                line.push_str(&format!(" do {}", updates.join(", ")));
            }
            line.push_str(&format!(" goto {};\n", pta.locations[edge.target].name));
            out.push_str(&line);
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
}

fn render_guard(pta: &Pta, guard: &Guard) -> String {
    let mut atoms: Vec<String> = Vec::new();
    for a in &guard.clock_atoms {
        atoms.push(format!(
            "{} {} {}",
            pta.clocks[a.clock],
            a.rel.as_str(),
            render_expr(pta, &a.bound)
        ));
    }
    for a in &guard.param_atoms {
        // Split expr ⋈ 0 into positive-left, negated-negative-right form.
        let mut lhs = ParamExpr::default();
        let mut rhs = ParamExpr::default();
        for (p, c) in &a.expr.coeffs {
            if c.is_positive() {
                lhs.add(*p, c.clone());
            } else {
                rhs.add(*p, -c.clone());
            }
        }
        if a.expr.constant.is_positive() {
            lhs.constant = a.expr.constant.clone();
        } else {
            rhs.constant = -a.expr.constant.clone();
        }
        atoms.push(format!(
            "{} {} {}",
            render_expr(pta, &lhs),
            a.rel.as_str(),
            render_expr(pta, &rhs)
        ));
    }
    for (d, expected) in &guard.bool_tests {
        let name = &pta.discretes[*d].0;
        atoms.push(if *expected {
            name.clone()
        } else {
            format!("!{name}")
        });
    }
    if atoms.is_empty() {
        "true".to_string()
    } else {
        atoms.join(" && ")
    }
}

fn render_expr(pta: &Pta, expr: &ParamExpr) -> String {
    let mut out = String::new();
    let mut first = true;
    let push_term = |coeff: &Rat, body: Option<&str>, out: &mut String, first: &mut bool| {
        let negative = coeff.is_negative();
        let magnitude = coeff.abs();
        if *first {
            if negative {
                out.push('-');
            }
            *first = false;
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        match body {
            Some(name) if magnitude.is_one() => out.push_str(name),
            Some(name) => out.push_str(&format!("{}*{}", render_rat(&magnitude), name)),
            None => out.push_str(&render_rat(&magnitude)),
        }
    };
    for (p, c) in &expr.coeffs {
        push_term(c, Some(&pta.params[*p].0), &mut out, &mut first);
    }
    if !expr.constant.is_zero() || first {
        let constant = expr.constant.clone();
        push_term(&constant, None, &mut out, &mut first);
    }
    out
}
