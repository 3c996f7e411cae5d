#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk::{build_step_operator, GraphDocument, TailConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = GraphDocument::from_json(text) else {
        return;
    };
    // documents survive a trip through their JSON value
    assert_eq!(GraphDocument::from_value(&doc.to_value()).unwrap(), doc);

    let Ok(graph) = doc.build() else {
        return;
    };
    if graph.vertex_count() <= 16 && graph.edges().len() <= 24 {
        let op = build_step_operator(&graph, TailConfig::new(2).unwrap());
        assert!(op.unitarity_deviation() < 1e-9);
    }
});
