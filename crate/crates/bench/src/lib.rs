//! Deterministic synthetic inputs for the benchmarks.

use std::collections::BTreeMap;

use archtrace::code::CodeModel;
use archtrace::model::{ArtifactKind, CodeArtifact, Component, LinkKind, LinkSet, Provenance, Sam};

const WORDS: [&str; 16] = [
    "Media",
    "Access",
    "User",
    "Management",
    "Storage",
    "Data",
    "Facade",
    "Logic",
    "Gui",
    "Model",
    "Cache",
    "Audio",
    "Tag",
    "Packaging",
    "Watermark",
    "Client",
];

/// `n` CamelCase names built from two words each; repeats and near-repeats
/// appear once `n` exceeds the number of word pairs.
pub fn names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let a = WORDS[i % WORDS.len()];
            let b = WORDS[(i / WORDS.len() + i) % WORDS.len()];
            if i % 7 == 3 {
                format!("{a}{}", &b[..b.len() - 1])
            } else {
                format!("{a}{b}")
            }
        })
        .collect()
}

pub fn sam(components: usize) -> Sam {
    let components = names(components)
        .into_iter()
        .enumerate()
        .map(|(i, name)| Component {
            id: format!("c{i}"),
            name,
        })
        .collect();
    Sam::new("bench", components, Provenance::Manual).expect("unique ids")
}

/// One directory per component, `files_per_component` files in each.
pub fn code(sam: &Sam, files_per_component: usize) -> CodeModel {
    let mut files = Vec::new();
    for component in &sam.components {
        let dir = component.name.to_lowercase();
        for f in 0..files_per_component {
            files.push(CodeArtifact {
                path: format!("src/main/java/org/bench/{dir}/Type{f}.java"),
                kind: ArtifactKind::File,
            });
        }
    }
    CodeModel {
        root: ".".into(),
        files,
        packages: Vec::new(),
        file_packages: BTreeMap::new(),
    }
}

/// Sentence-to-component and component-to-file links with a fixed fan-out.
pub fn link_sets(sentences: u32, components: usize, files: usize) -> (LinkSet, LinkSet) {
    let sad_sam = LinkSet::from_pairs(
        LinkKind::SadSam,
        (1..=sentences).flat_map(|s| {
            let c = s as usize;
            [
                (s.to_string(), format!("c{}", c % components)),
                (s.to_string(), format!("c{}", (c * 3) % components)),
            ]
        }),
    );
    let sam_code = LinkSet::from_pairs(
        LinkKind::SamCode,
        (0..files).map(|f| (format!("c{}", f % components), format!("f{f}.java"))),
    );
    (sad_sam, sam_code)
}

/// Paired differences without ties or zeros.
pub fn differences(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| {
            let magnitude = i as f64 / 100.0;
            if i % 4 == 0 {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect()
}
