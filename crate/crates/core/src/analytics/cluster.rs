use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AnalyticsError, StanceCounts};
use crate::model::StanceLabel;

pub const MAX_ZOOM: u8 = 18;

/// A geolocated pair to place on the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerPoint {
    pub pair_id: String,
    pub latitude: f64,
    pub longitude: f64,
    pub stance: Option<StanceLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub latitude: f64,
    pub longitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerCluster {
    /// `z{zoom}:{column}:{row}` of the grid cell.
    pub cluster_id: String,
    pub centroid: Centroid,
    pub pair_ids: Vec<String>,
    pub stance_breakdown: StanceCounts,
}

/// Grid cell side in degrees: `360 / 2^(zoom + 2)`.
pub fn cell_size(zoom: u8) -> f64 {
    360.0 / f64::from(1u32 << (u32::from(zoom) + 2))
}

/// Groups points sharing a grid cell at `zoom`. Clusters come out in order of
/// their first member; members keep input order. Cells halve with each zoom
/// level, so clusters at one zoom nest inside those of the level below.
pub fn cluster_markers(points: &[MarkerPoint], zoom: u8) -> Result<Vec<MarkerCluster>, AnalyticsError> {
    if zoom > MAX_ZOOM {
        return Err(AnalyticsError::InvalidZoom(zoom));
    }
    let cell = cell_size(zoom);
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut clusters: Vec<(MarkerCluster, f64, f64)> = Vec::new();
    for p in points {
        if !(-90.0..=90.0).contains(&p.latitude) || !(-180.0..=180.0).contains(&p.longitude) {
            return Err(AnalyticsError::InvalidCoordinates(p.pair_id.clone()));
        }
        let key = (
            ((p.longitude + 180.0) / cell).floor() as i64,
            ((p.latitude + 90.0) / cell).floor() as i64,
        );
        let slot = *index.entry(key).or_insert_with(|| {
            clusters.push((
                MarkerCluster {
                    cluster_id: format!("z{zoom}:{}:{}", key.0, key.1),
                    centroid: Centroid {
                        latitude: 0.0,
                        longitude: 0.0,
                    },
                    pair_ids: Vec::new(),
                    stance_breakdown: StanceCounts::default(),
                },
                0.0,
                0.0,
            ));
            clusters.len() - 1
        });
        let (cluster, lat_sum, lon_sum) = &mut clusters[slot];
        cluster.pair_ids.push(p.pair_id.clone());
        if let Some(s) = p.stance {
            cluster.stance_breakdown.add(s);
        }
        *lat_sum += p.latitude;
        *lon_sum += p.longitude;
    }
    Ok(clusters
        .into_iter()
        .map(|(mut c, lat, lon)| {
            let n = c.pair_ids.len() as f64;
            c.centroid = Centroid {
                latitude: lat / n,
                longitude: lon / n,
            };
            c
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(id: &str, latitude: f64, longitude: f64) -> MarkerPoint {
        MarkerPoint {
            pair_id: id.into(),
            latitude,
            longitude,
            stance: Some(StanceLabel::Positive),
        }
    }

    #[test]
    fn close_points_merge_at_low_zoom_and_split_at_high() {
        let pts = [point("a", 32.7001, -96.8001), point("b", 32.7011, -96.8011)];
        assert_eq!(cell_size(3), 11.25);
        let low = cluster_markers(&pts, 3).unwrap();
        assert_eq!(low.len(), 1);
        assert_eq!(low[0].pair_ids, ["a", "b"]);
        assert!((low[0].centroid.latitude - 32.7006).abs() < 1e-9);
        assert_eq!(low[0].stance_breakdown.positive, 2);
        assert_eq!(cluster_markers(&pts, 18).unwrap().len(), 2);
    }

    #[test]
    fn empty_and_invalid_inputs() {
        assert!(cluster_markers(&[], 5).unwrap().is_empty());
        assert!(cluster_markers(&[], 19).is_err());
        assert!(cluster_markers(&[point("x", 91.0, 0.0)], 1).is_err());
    }
}
