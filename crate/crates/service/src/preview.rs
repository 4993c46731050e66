use fractaug_core::dsl::{self, Expr};
use fractaug_core::graph::apply_with_params;
use fractaug_core::io::{self, BitDepth};
use fractaug_core::SampleBundle;
use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::{ApiError, StoredImage};

pub const MAX_GRID: usize = 16;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreviewRequest {
    pub pipeline: String,
    pub seed: u64,
    pub image_id: String,
    /// Number of panels; panel `i` uses seed `seed + i` (wrapping).
    #[serde(default)]
    pub grid: Option<usize>,
}

struct Part {
    name: String,
    content_type: &'static str,
    seed: u64,
    body: Vec<u8>,
}

/// Renders every panel and packs them into a `multipart/mixed` body. Per
/// panel: `image-i`, `mask-i` (when the upload has a mask), `validity-i`
/// and `params-i`. The boundary is derived from a hash of the parts, so the
/// bytes depend on nothing but the inputs.
pub fn render_preview(
    ast: &Expr,
    req: &PreviewRequest,
    stored: &StoredImage,
) -> Result<(String, Vec<u8>), ApiError> {
    let n = req.grid.unwrap_or(1);
    if !(1..=MAX_GRID).contains(&n) {
        return Err(ApiError::BadRequest(format!("grid must lie in 1..={MAX_GRID}, got {n}")));
    }
    let mut bundle = SampleBundle::new(stored.image.clone());
    bundle.mask = stored.mask.clone();
    let canonical = dsl::format(ast);

    let internal = |e: fractaug_core::Error| ApiError::Internal(e.to_string());
    let mut parts = Vec::new();
    for i in 0..n {
        let seed = req.seed.wrapping_add(i as u64);
        let graph = dsl::compile(ast, seed);
        let (out, applied) = apply_with_params(&graph, &bundle).map_err(internal)?;
        parts.push(Part {
            name: format!("image-{i}"),
            content_type: "image/png",
            seed,
            body: io::encode_png(&out.image, stored.depth).map_err(internal)?,
        });
        if let Some(m) = &out.mask {
            parts.push(Part {
                name: format!("mask-{i}"),
                content_type: "image/png",
                seed,
                body: io::encode_mask(m, stored.depth).map_err(internal)?,
            });
        }
        let validity = out.validity.expect("apply always sets validity");
        parts.push(Part {
            name: format!("validity-{i}"),
            content_type: "image/png",
            seed,
            body: io::encode_mask(&validity, BitDepth::Eight).map_err(internal)?,
        });
        let params = json!({ "seed": seed, "pipeline": canonical, "applied": applied });
        parts.push(Part {
            name: format!("params-{i}"),
            content_type: "application/json",
            seed,
            body: serde_json::to_vec(&params).map_err(|e| ApiError::Internal(e.to_string()))?,
        });
    }

    let mut h = Sha256::new();
    for p in &parts {
        h.update(p.name.as_bytes());
        h.update((p.body.len() as u64).to_le_bytes());
        h.update(&p.body);
    }
    let digest = h.finalize();
    let boundary: String = std::iter::once("fractaug-".to_string())
        .chain(digest[..16].iter().map(|b| format!("{b:02x}")))
        .collect();

    let mut body = Vec::new();
    for p in &parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        body.extend_from_slice(format!("Content-Type: {}\r\n", p.content_type).as_bytes());
        body.extend_from_slice(
            format!("Content-Disposition: inline; name=\"{}\"\r\n", p.name).as_bytes(),
        );
        body.extend_from_slice(format!("X-Seed: {}\r\n\r\n", p.seed).as_bytes());
        body.extend_from_slice(&p.body);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    Ok((format!("multipart/mixed; boundary={boundary}"), body))
}
