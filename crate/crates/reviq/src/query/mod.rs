//! Parser and deterministic evaluator for the declarative query subset
//! used to answer review-table questions over comparison graphs.

pub mod ast;
pub mod eval;
pub mod parse;

pub use ast::{Direction, Expr, Projection, QueryAst, TriplePattern};
pub use eval::{
    evaluate, evaluate_join, evaluate_on_store, explain, term_cmp, Bound, Env, EvalError, Store,
    StoreTriple, PROPERTY_NS, RDFS_LABEL,
};
pub use parse::{parse_query, ParseError};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Comparison, PropertyDef};
    use crate::tableio::{import_comparison_csv, CsvProfile};
    use crate::value::CellValue;

    fn lhar_fixture() -> Comparison {
        let csv = "\
contribution,paper,Pcontrib: contribution label,P32: research problem,P37561: deposition temperature [°C],P180003: LHAR type,P180008: cTMA [],P180009: reactor {res}
R1469105,R1469103,R1469105,Variation of precursor sticking coefficients in ALD on high-aspect-ratio structures,300,Microscopic rectangular PillarHall-3,0.00572,Picosun R-150
R1469111,R1469109,R1469111,Variation of precursor sticking coefficients in ALD on high-aspect-ratio structures,300,Microscopic rectangular PillarHall-3,0.00400,Beneq TFS-500
R1469120,R1469118,R1469120,Conformality benchmarking,250,Microscopic rectangular PillarHall-3,0.00210,Picosun R-150
R1469131,R1469129,R1469131,Conformality benchmarking,300,Macroscopic lateral channel,0.00310,Beneq TFS-500
";
        import_comparison_csv(csv.as_bytes(), &CsvProfile::default(), "R1469158", "LHAR").unwrap()
    }

    const Q2: &str = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?contribution ?research_problem ?temperature_c ?lhar_type ?ctma
WHERE {
  ?c orkgp:Pcontrib ?contribution ;
     orkgp:P37561 ?temperature_c ;
     orkgp:P180003 ?lhar_type ;
     orkgp:P180008 ?ctma .
  OPTIONAL { ?c orkgp:P32 ?research_problem . }
  FILTER(?temperature_c = 300 && ?lhar_type = "Microscopic rectangular PillarHall-3")
}
ORDER BY DESC(?ctma)
"#;

    #[test]
    fn q2_returns_the_two_pillarhall_rows() {
        let store = vec![lhar_fixture()];
        let ast = parse_query(Q2).unwrap();
        let t = evaluate(&ast, &store).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][4].render(), "0.00572");
        assert_eq!(t.rows[1][4].render(), "0.00400");
        assert_eq!(t.rows[0][0].render(), "R1469105");
    }

    #[test]
    fn empty_store_yields_header_only_table() {
        let ast = parse_query(Q2).unwrap();
        let t = evaluate(&ast, &[]).unwrap();
        assert_eq!(t.columns.len(), 5);
        assert!(t.rows.is_empty());
    }

    #[test]
    fn optional_soundness_rows_preserved() {
        // dropping the OPTIONAL never changes the row multiset, only columns
        let store = vec![lhar_fixture()];
        let with = evaluate(&parse_query(Q2).unwrap(), &store).unwrap();
        let stripped = Q2
            .replace("OPTIONAL { ?c orkgp:P32 ?research_problem . }", "")
            .replace("?research_problem ", "");
        let without = evaluate(&parse_query(&stripped).unwrap(), &store).unwrap();
        assert_eq!(with.rows.len(), without.rows.len());
    }

    #[test]
    fn group_by_count_and_order() {
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?reactor ?lhar (COUNT(*) AS ?n)
WHERE { ?c orkgp:P180009 ?reactor ; orkgp:P180003 ?lhar . }
GROUP BY ?reactor ?lhar
ORDER BY DESC(?n) ?reactor ?lhar
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[lhar_fixture()]).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.rows[0][2].render(), "2"); // Picosun x PillarHall-3
        assert_eq!(t.rows[0][0].render(), "Picosun R-150");
    }

    #[test]
    fn bind_arithmetic_and_rounding() {
        let mut c = Comparison::new(
            "R",
            "t",
            vec![PropertyDef::text("P1", "host"), PropertyDef::numeric("P2", "eqe", "%"), PropertyDef::numeric("P3", "vol", "V")],
        )
        .unwrap();
        let mut cells = std::collections::BTreeMap::new();
        cells.insert("P1".into(), CellValue::text("Ga2O3"));
        cells.insert("P2".into(), CellValue::number("36".parse().unwrap()));
        cells.insert("P3".into(), CellValue::number("15".parse().unwrap()));
        c.add_contribution("C1", "p", cells).unwrap();
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?host (round(?eqe / ?vol, 2) AS ?score)
WHERE { ?c orkgp:P1 ?host ; orkgp:P2 ?eqe ; orkgp:P3 ?vol . }
ORDER BY DESC(?score)
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[c]).unwrap();
        assert_eq!(t.rows[0][1].render(), "2.40");
    }

    #[test]
    fn filter_type_errors_drop_binding_not_fatal() {
        // cTMA compared against text: binding dropped silently
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?ctma
WHERE { ?c orkgp:P180008 ?ctma . FILTER(?ctma < "abc") }
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[lhar_fixture()]).unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn division_by_zero_drops_binding() {
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?ctma
WHERE { ?c orkgp:P180008 ?ctma . FILTER(?ctma / 0 > 1) }
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[lhar_fixture()]).unwrap();
        assert!(t.rows.is_empty());
    }

    #[test]
    fn aggregates_over_zero_inputs() {
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT (COUNT(?x) AS ?n) (AVG(?x) AS ?avg)
WHERE { ?c orkgp:Pnope ?x . }
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[lhar_fixture()]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][0].render(), "0");
        assert!(t.rows[0][1].is_absent());
    }

    #[test]
    fn determinism_repeated_evaluation_identical_bytes() {
        let store = vec![lhar_fixture()];
        let ast = parse_query(Q2).unwrap();
        let a = evaluate(&ast, &store).unwrap().to_csv(&CsvProfile::default());
        let b = evaluate(&ast, &store).unwrap().to_csv(&CsvProfile::default());
        assert_eq!(a, b);
    }

    #[test]
    fn explain_mentions_structure() {
        let ast = parse_query(Q2).unwrap();
        let plan = explain(&ast);
        assert!(plan.contains("scan: 4 pattern(s)"));
        assert!(plan.contains("left-join"));
        assert!(plan.contains("filter: 1 condition(s)"));
        let empty = parse_query("SELECT (COUNT(*) AS ?n) WHERE { }").unwrap();
        assert!(explain(&empty).contains("scan: nothing"));
    }

    #[test]
    fn range_filter_uses_any_part_semantics() {
        let csv = "\
contribution,paper,P1: temp [°C]
C1,p1,250--400
C2,p2,500
";
        let c = import_comparison_csv(csv.as_bytes(), &CsvProfile::default(), "R", "t").unwrap();
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?t WHERE { ?c orkgp:P1 ?t . FILTER(?t <= 250) }
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[c]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][0].render(), "250--400");
    }

    #[test]
    fn qualified_numbers_compare_by_numeric_part() {
        let csv = "contribution,paper,P1: volt [V]\nC1,p1,~15\nC2,p2,50\n";
        let c = import_comparison_csv(csv.as_bytes(), &CsvProfile::default(), "R", "t").unwrap();
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
SELECT ?v WHERE { ?c orkgp:P1 ?v . FILTER(?v <= 20) }
"#;
        let t = evaluate(&parse_query(q).unwrap(), &[c]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][0].render(), "~15");
    }

    #[test]
    fn join_across_comparisons_on_resource() {
        let a = import_comparison_csv(
            "contribution,paper,P1: host {res}\nC1,p1,Ga2O3\nC2,p2,ZnO\n".as_bytes(),
            &CsvProfile::default(),
            "RA",
            "a",
        )
        .unwrap();
        let b = import_comparison_csv(
            "contribution,paper,P2: material {res},P3: gpc []\nD1,p3,Ga2O3,1.0\n".as_bytes(),
            &CsvProfile::default(),
            "RB",
            "b",
        )
        .unwrap();
        let q = r#"
PREFIX orkgp: <http://orkg.org/property/>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
SELECT ?label ?gpc
WHERE {
  ?c orkgp:P1 ?h .
  ?d orkgp:P2 ?h ; orkgp:P3 ?gpc .
  ?h rdfs:label ?label .
}
"#;
        let t = evaluate_join(&parse_query(q).unwrap(), &[a.clone(), b.clone()]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][0].render(), "Ga2O3");
        // join on a value present in only one table: empty result
        let q2 = q.replace("P2 ?h", "Pnope ?h");
        let t2 = evaluate_join(&parse_query(&q2).unwrap(), &[a, b]).unwrap();
        assert!(t2.rows.is_empty());
    }
}
