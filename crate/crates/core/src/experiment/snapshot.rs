use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::runner::{create_output, format_sig};
use crate::error::{Error, Result};
use crate::model::{CachingPolicy, ContentCatalog, NetworkConfig};
use crate::sim::{fill_caches, serve_request, Association, Deployment};

/// UEs placed in a snapshot.
pub const SNAPSHOT_UES: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub ue_id: usize,
    pub x: f64,
    pub y: f64,
    pub requested_file: usize,
    /// `bs`, `rn` or `none`.
    pub serving_type: String,
    pub serving_id: Option<usize>,
    /// BS feeding the serving node (the serving BS itself for one hop).
    pub source_bs: Option<usize>,
    pub hop_count: u8,
    pub offload_success: bool,
}

/// Associations of [`SNAPSHOT_UES`] UEs in one deployment.
///
/// Node positions, blockage and caches come from one stream seeded by
/// `seed`; UE positions and requests from a second, so two policies on the
/// same seed see the same network and the same requests.
pub fn snapshot_rows(
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
    policy: &CachingPolicy,
    seed: u64,
) -> Result<Vec<SnapshotRow>> {
    cfg.validate()?;
    if policy.len() != catalog.f_count {
        return Err(Error::InvalidPolicy("policy length does not match the catalogue".into()));
    }
    policy.validate(catalog.cache_size)?;
    let mut net_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dep = Deployment::sample(cfg, &mut net_rng, seed)?;
    while dep.bs_positions.is_empty() {
        dep = Deployment::sample(cfg, &mut net_rng, seed)?;
    }
    let mut cache_rng = ChaCha8Rng::seed_from_u64(seed);
    cache_rng.set_stream(1);
    fill_caches(&mut dep, policy, &mut cache_rng);
    let requests = WeightedIndex::new(&catalog.popularity)
        .map_err(|e| Error::InvalidArgument(format!("popularity: {e}")))?;
    let mut ue_rng = ChaCha8Rng::seed_from_u64(seed);
    ue_rng.set_stream(2);
    let mut rows = Vec::with_capacity(SNAPSHOT_UES);
    for ue_id in 0..SNAPSHOT_UES {
        let pos = [
            ue_rng.random::<f64>() * cfg.area_side,
            ue_rng.random::<f64>() * cfg.area_side,
        ];
        let file = requests.sample(&mut ue_rng);
        let mut link_rng = ChaCha8Rng::seed_from_u64(seed);
        link_rng.set_stream(3 + ue_id as u64);
        let at = dep.with_ue(pos, cfg, &mut link_rng);
        let served = serve_request(&at, file, catalog.sinr_thresholds[file], cfg, &mut link_rng)?;
        let sel = served.selection;
        let (serving_type, serving_id, hop_count) = match sel.association {
            Association::OneHop => ("bs", sel.bs, 1),
            Association::TwoHop => ("rn", sel.rn, 2),
            Association::None => ("none", None, 0),
        };
        rows.push(SnapshotRow {
            ue_id,
            x: pos[0],
            y: pos[1],
            requested_file: file,
            serving_type: serving_type.into(),
            serving_id,
            source_bs: sel.bs,
            hop_count,
            offload_success: served.offload_success,
        });
    }
    Ok(rows)
}

/// Writes the snapshot of `policy` to `path` as CSV.
pub fn emit_association_snapshot(
    cfg: &NetworkConfig,
    catalog: &ContentCatalog,
    policy: &CachingPolicy,
    seed: u64,
    config_hash: &str,
    path: &Path,
) -> Result<Vec<SnapshotRow>> {
    let rows = snapshot_rows(cfg, catalog, policy, seed)?;
    let mut w = csv::Writer::from_writer(create_output(path)?);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record([
        "ue_id",
        "x",
        "y",
        "requested_file",
        "serving_type",
        "serving_id",
        "source_bs",
        "hop_count",
        "offload_success",
        "config_hash",
    ])
    .map_err(csv_err)?;
    let opt = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.ue_id.to_string(),
            format_sig(r.x),
            format_sig(r.y),
            r.requested_file.to_string(),
            r.serving_type.clone(),
            opt(r.serving_id),
            opt(r.source_bs),
            r.hop_count.to_string(),
            r.offload_success.to_string(),
            config_hash.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(rows)
}
