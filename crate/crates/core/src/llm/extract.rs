use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("no model block")]
    NoModelBlock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub model_text: String,
    /// The `LTLSPEC` lines, possibly empty.
    pub spec_text: String,
}

/// Contents of the fenced code blocks of a response. An unterminated
/// final block runs to the end of the text.
fn fenced_blocks(response: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in response.lines() {
        let is_fence = line.trim_start().starts_with("```");
        match (&mut current, is_fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(lines), true) => {
                blocks.push(lines.join("\n"));
                current = None;
            }
            (Some(lines), false) => lines.push(line),
            (None, false) => {}
        }
    }
    if let Some(lines) = current {
        blocks.push(lines.join("\n"));
    }
    blocks
}

fn spec_start(block: &str) -> Option<usize> {
    let mut offset = 0;
    for line in block.split_inclusive('\n') {
        if line.trim_start().starts_with("LTLSPEC") {
            return Some(offset + (line.len() - line.trim_start().len()));
        }
        offset += line.len();
    }
    None
}

/// Picks the first fenced block mentioning `MODULE main` and splits it at
/// its first `LTLSPEC` line. When that block has no specification, the
/// first later block with an `LTLSPEC` line supplies it.
pub fn extract_artifacts(response: &str) -> Result<Artifacts, ExtractError> {
    let blocks = fenced_blocks(response);
    let idx = blocks
        .iter()
        .position(|b| b.contains("MODULE main"))
        .ok_or(ExtractError::NoModelBlock)?;
    let block = &blocks[idx];
    let (model, spec) = match spec_start(block) {
        Some(at) => (block[..at].to_string(), block[at..].to_string()),
        None => {
            let spec = blocks[idx + 1..]
                .iter()
                .find_map(|b| spec_start(b).map(|at| b[at..].to_string()))
                .unwrap_or_default();
            (block.clone(), spec)
        }
    };
    Ok(Artifacts {
        model_text: model.trim().to_string() + "\n",
        spec_text: spec.trim().to_string(),
    })
}
