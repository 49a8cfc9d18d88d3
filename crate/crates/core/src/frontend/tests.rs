use super::*;

const SAMPLE: &str = include_str!("../../tests/data/sample.oo");

fn ids(body: &[Stmt]) -> Vec<StmtId> {
    let mut out = Vec::new();
    walk_body(body, &mut |s| out.extend(s.id));
    out
}

#[test]
fn sample_program_numbering() {
    let p = parse(SAMPLE).unwrap();
    assert_eq!(p.stmt_count, 24);
    assert_eq!(ids(&p.main), (1..=16).collect::<Vec<_>>());
    let test = p.class("test").unwrap();
    let method_ids: Vec<StmtId> = test.methods.iter().flat_map(|m| ids(&m.body)).collect();
    assert_eq!(method_ids, (17..=24).collect::<Vec<_>>());
}

#[test]
fn sample_has_two_distinct_add_signatures() {
    let p = parse(SAMPLE).unwrap();
    let adds: Vec<&Signature> = p
        .class("test")
        .unwrap()
        .methods
        .iter()
        .filter(|m| m.name == "add")
        .map(|m| &m.signature)
        .collect();
    assert_eq!(adds.len(), 2);
    assert_ne!(adds[0], adds[1]);
    assert_eq!(adds[0].to_string(), "add(test,test)");
    assert_eq!(adds[1].to_string(), "add(test,int)");
}

#[test]
fn empty_main() {
    let p = parse("void main(){}").unwrap();
    assert_eq!(p.stmt_count, 0);
    assert!(p.main.is_empty());
}

#[test]
fn overload_resolution_examples() {
    let p = parse(SAMPLE).unwrap();
    let test = p.class("test").unwrap();
    let cls = Type::Class("test".into());
    let first = resolve_overload(test, "add", &[cls.clone(), cls.clone()]).unwrap();
    assert_eq!(first.body[0].id, Some(21));
    let second = resolve_overload(test, "add", &[cls, Type::Int]).unwrap();
    assert_eq!(second.body[0].id, Some(23));
    let err = resolve_overload(test, "add", &[Type::Int, Type::Int]).unwrap_err();
    assert_eq!(
        err.to_string(),
        "no method matching `add(int,int)` in class `test`"
    );
    // arity is part of the key
    assert!(resolve_overload(test, "get", &[Type::Int]).is_err());
}

#[test]
fn call_sites_record_static_actual_types() {
    let p = parse(SAMPLE).unwrap();
    let (_, s15) = p.stmt(15).unwrap();
    match &s15.kind {
        StmtKind::Call {
            info: Some(info), ..
        } => {
            assert_eq!(info.class, "test");
            assert_eq!(info.arg_types, vec![Type::Class("test".into()), Type::Int]);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unresolvable_call_is_rejected_at_check_time() {
    let src = SAMPLE.replace("#15: T4.add(T3, 5);", "#15: T4.add(p, 5);");
    let err = parse(&src).unwrap_err();
    assert!(matches!(err, FrontendError::NoMatch { .. }), "{err}");
}

#[test]
fn unlabeled_programs_number_in_textual_order() {
    let src = "class c { int m; public: void set(int v) { m = v; } };
        void main() { c o; int x; cin >> x; if (x > 0) { o.set(x); } else { x = 1; } cout << x; }";
    let p = parse(src).unwrap();
    assert_eq!(p.stmt_count, 6);
    // method body comes first in the text
    assert_eq!(ids(&p.classes[0].methods[0].body), vec![1]);
    assert_eq!(ids(&p.main), vec![2, 3, 4, 5, 6]);
}

#[test]
fn mixed_labels_fill_remaining_ids() {
    let p = parse("void main() { int a; #3: a = 1; a = 2; a = 3; }").unwrap();
    assert_eq!(ids(&p.main), vec![3, 1, 2]);
}

#[test]
fn label_collision_and_gap() {
    let err = parse("void main() { int a;\n #1: a = 1;\n #1: a = 2; }").unwrap_err();
    assert!(
        matches!(
            err,
            FrontendError::Label {
                pos: Pos { line: 3, .. },
                ..
            }
        ),
        "{err}"
    );
    let err = parse("void main() { int a; #5: a = 1; }").unwrap_err();
    assert!(matches!(err, FrontendError::Label { .. }), "{err}");
    let err = parse("void main() { #1: int a; }").unwrap_err();
    assert!(matches!(err, FrontendError::Label { .. }), "{err}");
}

#[test]
fn duplicates_are_rejected() {
    let dup_class = "class c { public: }; class c { public: }; void main() {}";
    assert!(matches!(
        parse(dup_class),
        Err(FrontendError::Duplicate { .. })
    ));
    let dup_member = "class c { int a, a; public: }; void main() {}";
    assert!(matches!(
        parse(dup_member),
        Err(FrontendError::Duplicate { .. })
    ));
    let dup_sig = "class c { int a; public: void f(int x) { a = x; } void f(int y) { a = y; } };
        void main() {}";
    assert!(matches!(
        parse(dup_sig),
        Err(FrontendError::Duplicate { .. })
    ));
    let dup_var = "void main() { int a; int a; }";
    assert!(matches!(
        parse(dup_var),
        Err(FrontendError::Duplicate { .. })
    ));
}

#[test]
fn syntax_errors_report_position() {
    let err = parse("void main() {\n  cin >> ;\n}").unwrap_err();
    assert_eq!(err.pos(), Pos { line: 2, col: 10 });
    assert!(err.to_string().starts_with("2:10: syntax error"), "{err}");
}

#[test]
fn semantic_errors() {
    for src in [
        "void main() { x = 1; }",
        "void main() { int x; return x; }",
        "class c { int a; public: void f() { return 1; } }; void main() {}",
        "class c { int a; public: int f() { return; } }; void main() {}",
        "class c { int a; public: void f(int &r) { r = 1; } }; void main() { c o; o.f(3); }",
        "class c { int a; public: void f() { } }; void main() { c o; int x; x = o.f(); }",
        "class c { int a; public: }; void main() { c o; cout << o; }",
        "class c { int a; public: }; void main() { c o; o.z = 1; }",
        "void main() { int x; x.f(); }",
        "void main() { d o; }",
    ] {
        assert!(parse(src).is_err(), "accepted: {src}");
    }
}

#[test]
fn locals_shadow_receiver_members() {
    let src = "class c { int a; public: void f(int a) { a = 1; } }; void main() {}";
    let p = parse(src).unwrap();
    let scope = Scope::of(
        &p,
        ProcId::Method {
            class: 0,
            method: 0,
        },
    );
    assert_eq!(
        scope.resolve(&LValue::var("a")),
        Some(Resolved::LocalScalar("a".into()))
    );
}

#[test]
fn pretty_round_trip_on_sample() {
    let p = parse(SAMPLE).unwrap();
    let again = parse(&pretty(&p)).unwrap();
    assert_eq!(p.without_positions(), again.without_positions());
}

#[test]
fn pretty_keeps_operator_grouping() {
    let src = "void main() { int a, b; #1: a = (a - (b - 1)) * -(a + 2) / 3; }";
    let p = parse(src).unwrap();
    let again = parse(&pretty(&p)).unwrap();
    assert_eq!(p.without_positions(), again.without_positions());
}
