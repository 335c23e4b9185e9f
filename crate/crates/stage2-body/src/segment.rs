//! Paragraph-level segmentation of skill bodies.

/// Splits a body into paragraph-level items.
///
/// Blocks are delimited by blank lines, with two exceptions: fenced code
/// blocks stay atomic even when they contain blank lines, and headings attach
/// to the block that follows them so a section title never floats alone.
/// Joining the items back together reproduces the body modulo blank-line
/// normalization.
pub fn segment_body(body: &str) -> Vec<String> {
    let mut items: Vec<String> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut in_fence = false;
    // True while `current` holds only heading lines still waiting for the
    // content that belongs to them.
    let mut pending_heading = false;

    for line in body.lines() {
        let trimmed = line.trim();
        if in_fence {
            current.push(line);
            if trimmed.starts_with("```") {
                in_fence = false;
            }
            continue;
        }
        if trimmed.starts_with("```") {
            in_fence = true;
            current.push(line);
            pending_heading = false;
            continue;
        }
        if trimmed.is_empty() {
            if !current.is_empty() && !pending_heading {
                items.push(current.join("\n"));
                current.clear();
            }
            continue;
        }
        if trimmed.starts_with('#') {
            if current.is_empty() || pending_heading {
                current.push(line);
            } else {
                items.push(current.join("\n"));
                current.clear();
                current.push(line);
            }
            pending_heading = true;
            continue;
        }
        current.push(line);
        pending_heading = false;
    }
    if !current.is_empty() {
        items.push(current.join("\n"));
    }
    items
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_paragraphs_and_a_fence_yield_four_items() {
        let body = "First paragraph.\n\nSecond paragraph\nspanning two lines.\n\n```python\nprint(1)\n\nprint(2)\n```\n\nClosing remark.\n";
        let items = segment_body(body);
        assert_eq!(items.len(), 4);
        assert_eq!(items[2], "```python\nprint(1)\n\nprint(2)\n```");
    }

    #[test]
    fn headings_attach_to_their_following_block() {
        let body = "## Setup\n\nInstall the tool.\n\n## Usage\nRun it.\n";
        let items = segment_body(body);
        assert_eq!(items, vec!["## Setup\nInstall the tool.", "## Usage\nRun it."]);
    }

    #[test]
    fn single_block_body_yields_one_item() {
        let items = segment_body("only one line");
        assert_eq!(items, vec!["only one line"]);
    }

    #[test]
    fn trailing_heading_without_content_becomes_its_own_item() {
        let items = segment_body("Text.\n\n## Orphan\n");
        assert_eq!(items, vec!["Text.", "## Orphan"]);
    }
}
