use dynslice::interp::{run, ExitStatus, DEFAULT_BUDGET};
use dynslice::oracle::{build_ddg, cross_check};
use dynslice::{build_cdg, parse, Slicer, StmtId, StmtSet};

fn set(ids: &[StmtId]) -> StmtSet {
    ids.iter().copied().collect()
}

/// Runs `src` and returns a lookup that answers from both engines after
/// checking they agree everywhere.
fn both(src: &str, inputs: &[i64]) -> impl Fn(StmtId, &str) -> StmtSet {
    let p = parse(src).unwrap();
    let cdg = build_cdg(&p);
    let (events, status) = run(&p, inputs, DEFAULT_BUDGET);
    assert_eq!(status, ExitStatus::Completed);
    cross_check(&cdg, &events).unwrap();
    let ddg = build_ddg(&events).unwrap();
    let mut s = Slicer::new(&cdg);
    for e in &events {
        s.apply(e).unwrap();
    }
    let answers: Vec<((StmtId, String), StmtSet)> = s
        .criteria()
        .map(|((n, v), set)| ((*n, v.to_string()), set.clone()))
        .collect();
    move |node, var| {
        let reference = ddg.backward_slice(node, var).unwrap();
        let streaming = answers
            .iter()
            .find(|((n, v), _)| *n == node && v == var)
            .map(|(_, s)| s.clone())
            .unwrap_or_default();
        assert_eq!(streaming, reference, "({node},{var})");
        streaming
    }
}

#[test]
fn by_reference_swap() {
    let src = "class c { int k; public:
        void swap(int &a, int &b) { int t; #1: t = a; #2: a = b; #3: b = t; }
    };
    void main() { c o; int x, y;
        #4: cin >> x; #5: cin >> y; #6: o.swap(x, y); #7: cout << x; #8: cout << y; }";
    let q = both(src, &[1, 2]);
    assert_eq!(q(7, "x"), set(&[2, 5, 6]));
    assert_eq!(q(8, "y"), set(&[1, 3, 4, 6]));
}

#[test]
fn by_value_writes_stay_local() {
    let src = "class c { int k; public:
        void f(int a) { #1: a = 7; #2: k = a; }
    };
    void main() { c o; int x; #3: x = 1; #4: o.f(x); #5: cout << x; #6: cout << o.k; }";
    let q = both(src, &[]);
    assert_eq!(q(5, "x"), set(&[3]));
    assert_eq!(q(6, "o.k"), set(&[1, 2, 4]));
}

#[test]
fn nested_loops() {
    let src = "void main() { int i, j, s;
        #1: s = 0; #2: i = 0;
        #3: while (i < 2) {
            #4: j = 0;
            #5: while (j < 2) { #6: s = s + 1; #7: j = j + 1; }
            #8: i = i + 1;
        }
        #9: cout << s; #10: cout << i; }";
    let q = both(src, &[]);
    assert_eq!(q(9, "s"), set(&[1, 2, 3, 4, 5, 6, 7, 8]));
    // i never depends on the inner loop
    assert_eq!(q(10, "i"), set(&[2, 3, 8]));
}

#[test]
fn a_branch_not_taken_leaves_no_trace() {
    let src = "void main() { int a, b;
        #1: cin >> a; #2: b = 0;
        #3: if (a > 10) { #4: b = 1; } else { #5: a = a + 1; }
        #6: cout << b; }";
    let q = both(src, &[3]);
    assert_eq!(q(6, "b"), set(&[2]));
    let q = both(src, &[30]);
    assert_eq!(q(6, "b"), set(&[1, 3, 4]));
}

#[test]
fn recursion_keeps_activations_apart() {
    let src = "class c { int k; public:
        void down(c self, int n) {
            #1: if (n > 0) { #2: k = k + n; #3: self.down(self, n - 1); }
        }
    };
    void main() { c o; int m; #4: cin >> m; #5: o.k = 0; #6: o.down(o, m); #7: cout << o.k; }";
    let q = both(src, &[3]);
    assert_eq!(q(7, "o.k"), set(&[1, 2, 4, 5, 6]));
}

#[test]
fn early_return_from_a_loop() {
    let src = "class c { int k; public:
        int find(int lim) { int i;
            #1: i = 0;
            #2: while (i < 10) { #3: if (i == lim) { #4: return i; } #5: i = i + 1; }
        }
    };
    void main() { c o; int r, q; #6: cin >> q; #7: r = o.find(q); #8: cout << r; }";
    let q = both(src, &[3]);
    assert_eq!(q(8, "r"), set(&[1, 2, 3, 4, 5, 6, 7]));
    // falling off the end returns nothing: r stays undefined
    let q = both(src, &[20]);
    assert_eq!(q(8, "r"), StmtSet::new());
}

#[test]
fn nested_calls_carry_the_outer_call_site() {
    let src = "class c { int k; public:
        int inner(int v) { #1: return v + 1; }
        void outer(c o, int v) { int t; #2: t = o.inner(v); #3: k = t; }
    };
    void main() { c a, b; int x; #4: x = 5; #5: a.outer(b, x); #6: cout << a.k; }";
    let q = both(src, &[]);
    assert_eq!(q(6, "a.k"), set(&[1, 2, 3, 4, 5]));
}
