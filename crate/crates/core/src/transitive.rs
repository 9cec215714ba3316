//! Composition of documentation-to-model and model-to-code links into
//! documentation-to-code links.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{LinkKind, LinkSet, TraceLink};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("expected a {expected} link set, got {actual}")]
pub struct KindMismatch {
    pub expected: LinkKind,
    pub actual: LinkKind,
}

fn expect_kind(links: &LinkSet, expected: LinkKind) -> Result<(), KindMismatch> {
    if links.kind() == expected {
        Ok(())
    } else {
        Err(KindMismatch {
            expected,
            actual: links.kind(),
        })
    }
}

/// `(s, f)` is in the result iff some component `c` has `(s, c)` in `sad_sam`
/// and `(c, f)` in `sam_code`.
pub fn compose_links(sad_sam: &LinkSet, sam_code: &LinkSet) -> Result<LinkSet, KindMismatch> {
    expect_kind(sad_sam, LinkKind::SadSam)?;
    expect_kind(sam_code, LinkKind::SamCode)?;
    let mut files_of: HashMap<&str, Vec<&str>> = HashMap::new();
    for link in sam_code {
        files_of.entry(&link.left).or_default().push(&link.right);
    }
    let mut out = LinkSet::new(LinkKind::SadCode);
    for link in sad_sam {
        for file in files_of.get(link.right.as_str()).into_iter().flatten() {
            out.insert(TraceLink::new(link.left.clone(), *file));
        }
    }
    Ok(out)
}
