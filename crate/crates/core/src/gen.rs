//! Seeded random program generator for differential testing.
//!
//! Programs have one class `A` with an overloaded pair
//! `upd(int, int &)` / `upd(A, int)` and an int method `calc(int)`, and
//! sometimes a second, method-less class `B`. `if`/`while` nest at most
//! three deep, loops run on dedicated counters with literal bounds,
//! division is only by a literal 2..=5 and by-reference actuals are
//! always plain scalars of `main`, so no object is reachable through two
//! names. Nothing recurses.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frontend::{parse, Program};

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Upper bound on executable statements, methods included.
    pub max_stmts: usize,
    /// Length of the generated input sequence.
    pub inputs: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_stmts: 40,
            inputs: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub seed: u64,
    pub source: String,
    pub program: Program,
    pub inputs: Vec<i64>,
}

const MAX_NEST: usize = 3;

pub fn generate(seed: u64) -> Generated {
    generate_with(seed, &GenConfig::default())
}

pub fn generate_with(seed: u64, config: &GenConfig) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = (0..config.inputs).map(|_| rng.gen_range(-5..=20)).collect();
    let mut g = Gen {
        rng,
        left: config.max_stmts.max(4),
        out: String::new(),
    };
    let source = g.program();
    let program = match parse(&source) {
        Ok(p) => p,
        Err(e) => panic!("generator produced an invalid program ({e}):\n{source}"),
    };
    Generated {
        seed,
        source,
        program,
        inputs,
    }
}

#[derive(Clone, Default)]
struct Scope {
    reads: Vec<String>,
    writes: Vec<String>,
    /// Receivers for calls.
    objects: Vec<String>,
    /// `main` scalars eligible as by-reference actuals.
    ref_scalars: Vec<String>,
    in_main: bool,
    /// Inside `upd(A o, int x)`: may call `o.calc`.
    can_calc: bool,
    /// Inside `calc`, which must return a value.
    int_method: bool,
    void_method: bool,
    loops: usize,
}

struct Gen {
    rng: ChaCha8Rng,
    left: usize,
    out: String,
}

impl Gen {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn program(&mut self) -> String {
        let members: &[&str] = if self.rng.gen_bool(0.5) {
            &["a", "b"]
        } else {
            &["a", "b", "c"]
        };
        let with_b = self.rng.gen_bool(0.5);
        let method_share = (self.left / 4).max(1);

        self.line(0, "class A {");
        self.line(1, &format!("int {};", members.join(", ")));
        self.line(0, "public:");

        let member_names: Vec<String> = members.iter().map(|m| m.to_string()).collect();
        let method_scope = |extra: &[&str]| {
            let mut reads = member_names.clone();
            reads.extend(extra.iter().map(|s| s.to_string()));
            reads.push("t".into());
            Scope {
                writes: reads.clone(),
                reads,
                ..Scope::default()
            }
        };

        self.line(1, "void upd(int x, int &r) {");
        self.line(2, "int t, k1, k2, k3;");
        let mut s = method_scope(&["x", "r"]);
        s.void_method = true;
        let n = self.share(method_share);
        self.block(&mut s, 2, 0, n);
        self.line(1, "}");

        self.line(1, "void upd(A o, int x) {");
        self.line(2, "int t, k1, k2, k3;");
        let mut s = method_scope(&["x"]);
        for m in members {
            s.reads.push(format!("o.{m}"));
            s.writes.push(format!("o.{m}"));
        }
        s.objects.push("o".into());
        s.can_calc = true;
        s.void_method = true;
        let n = self.share(method_share);
        self.block(&mut s, 2, 0, n);
        self.line(1, "}");

        self.line(1, "int calc(int v) {");
        self.line(2, "int t, k1, k2, k3;");
        let mut s = method_scope(&["v"]);
        s.int_method = true;
        let n = self.share(method_share).saturating_sub(1);
        self.block(&mut s, 2, 0, n);
        let e = self.expr(&s, 2);
        self.left -= 1;
        self.line(2, &format!("return {e};"));
        self.line(1, "}");
        self.line(0, "};");
        self.line(0, "");

        if with_b {
            self.line(0, "class B {");
            self.line(1, "int u, w;");
            self.line(0, "public:");
            self.line(0, "};");
            self.line(0, "");
        }

        self.line(0, "void main() {");
        let objs = self.rng.gen_range(1..=3);
        let names: Vec<String> = (1..=objs).map(|i| format!("o{i}")).collect();
        self.line(1, &format!("A {};", names.join(", ")));
        self.line(1, "int y1, y2, y3, y4, k1, k2, k3;");
        let mut s = Scope {
            in_main: true,
            ..Scope::default()
        };
        for y in ["y1", "y2", "y3", "y4"] {
            s.reads.push(y.into());
            s.writes.push(y.into());
            s.ref_scalars.push(y.into());
        }
        for o in &names {
            for m in members {
                s.reads.push(format!("{o}.{m}"));
                s.writes.push(format!("{o}.{m}"));
            }
        }
        s.objects = names;
        if with_b {
            self.line(1, "B q1;");
            for m in ["u", "w"] {
                s.reads.push(format!("q1.{m}"));
                s.writes.push(format!("q1.{m}"));
            }
        }
        let n = self.left.max(1);
        self.block(&mut s, 1, 0, n);
        self.line(0, "}");
        std::mem::take(&mut self.out)
    }

    fn share(&mut self, cap: usize) -> usize {
        self.rng.gen_range(1..=cap).min(self.left.saturating_sub(2))
    }

    /// Emits up to `n` statements (counting nested ones), at least one if
    /// the global budget allows.
    fn block(&mut self, s: &mut Scope, indent: usize, nest: usize, n: usize) {
        let mut quota = n.min(self.left);
        while quota > 0 {
            let used = self.stmt(s, indent, nest, quota);
            quota -= used.min(quota);
        }
    }

    /// Emits one statement and returns how many executable statements it
    /// took.
    fn stmt(&mut self, s: &mut Scope, indent: usize, nest: usize, quota: usize) -> usize {
        let before = self.left;
        let can_nest = nest < MAX_NEST;
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=11 if can_nest && quota >= 2 => {
                let c = self.cond(s);
                self.left -= 1;
                self.line(indent, &format!("if ({c}) {{"));
                let inner = self.rng.gen_range(1..=(quota - 1).min(4));
                self.block(s, indent + 1, nest + 1, inner);
                let rest = quota - (before - self.left);
                if rest >= 1 && self.left >= 1 && self.rng.gen_bool(0.4) {
                    self.line(indent, "} else {");
                    let inner = self.rng.gen_range(1..=rest.min(3));
                    self.block(s, indent + 1, nest + 1, inner);
                }
                self.line(indent, "}");
            }
            12..=21 if can_nest && s.loops < 3 && quota >= 3 => {
                s.loops += 1;
                let k = format!("k{}", s.loops);
                let bound = self.rng.gen_range(0..=3);
                self.left -= 3;
                self.line(indent, &format!("{k} = 0;"));
                self.line(indent, &format!("while ({k} < {bound}) {{"));
                s.reads.push(k.clone());
                let inner = self.rng.gen_range(0..=(quota - 3).min(4));
                self.block(s, indent + 1, nest + 1, inner);
                s.reads.pop();
                self.line(indent + 1, &format!("{k} = {k} + 1;"));
                self.line(indent, "}");
                s.loops -= 1;
            }
            22..=41 if s.in_main || s.can_calc => self.call(s, indent),
            42..=49 => {
                let t = s.writes.choose(&mut self.rng).unwrap().clone();
                self.left -= 1;
                self.line(indent, &format!("cin >> {t};"));
            }
            50..=57 => {
                let e = self.expr(s, 2);
                self.left -= 1;
                self.line(indent, &format!("cout << {e};"));
            }
            58..=60 if nest > 0 && (s.int_method || s.void_method) => {
                self.left -= 1;
                if s.int_method {
                    let e = self.expr(s, 1);
                    self.line(indent, &format!("return {e};"));
                } else {
                    self.line(indent, "return;");
                }
            }
            _ => {
                let t = s.writes.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(s, 2);
                self.left -= 1;
                self.line(indent, &format!("{t} = {e};"));
            }
        }
        before - self.left
    }

    fn call(&mut self, s: &Scope, indent: usize) {
        self.left -= 1;
        let recv = s.objects.choose(&mut self.rng).unwrap().clone();
        if !s.in_main {
            let e = self.expr(s, 1);
            self.line(indent, &format!("t = {recv}.calc({e});"));
            return;
        }
        match self.rng.gen_range(0..3) {
            0 => {
                let r = s.ref_scalars.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(s, 1);
                self.line(indent, &format!("{recv}.upd({e}, {r});"));
            }
            1 => {
                let arg = s.objects.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(s, 1);
                self.line(indent, &format!("{recv}.upd({arg}, {e});"));
            }
            _ => {
                let t = s.ref_scalars.choose(&mut self.rng).unwrap().clone();
                let e = self.expr(s, 1);
                self.line(indent, &format!("{t} = {recv}.calc({e});"));
            }
        }
    }

    fn cond(&mut self, s: &Scope) -> String {
        let op = ["<", ">", "<=", ">=", "==", "!="]
            .choose(&mut self.rng)
            .unwrap();
        let l = self.expr(s, 1);
        let r = self.expr(s, 1);
        format!("{l} {op} {r}")
    }

    fn expr(&mut self, s: &Scope, depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.45) {
            return self.leaf(s);
        }
        let l = self.expr(s, depth - 1);
        match self.rng.gen_range(0..10) {
            0..=3 => format!("({l} + {})", self.expr(s, depth - 1)),
            4..=5 => format!("({l} - {})", self.expr(s, depth - 1)),
            6..=7 => format!("({l} * {})", self.expr(s, depth - 1)),
            8 => format!("({l} / {})", self.rng.gen_range(2..=5)),
            _ => format!("-{}", self.leaf(s)),
        }
    }

    fn leaf(&mut self, s: &Scope) -> String {
        if s.reads.is_empty() || self.rng.gen_bool(0.25) {
            self.rng.gen_range(0..10).to_string()
        } else {
            s.reads.choose(&mut self.rng).unwrap().clone()
        }
    }
}
