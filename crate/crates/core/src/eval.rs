//! Dataset-level evaluation: metrics for every mesh in a manifest plus an
//! aggregate row, written as CSV.
//!
//! Manifest (`paths relative to the manifest file`):
//!
//! ```json
//! {"meshes": [{"name": "chair_01", "mesh": "chair_01.off",
//!              "ground_truth": ["chair_01_0.seg", "chair_01_1.seg"]}]}
//! ```
//!
//! A method's outputs live in one directory as `{name}.json` or
//! `{name}.seg`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::io::{load_labels, load_mesh};
use crate::mesh::{FaceLabeling, TriMesh};
use crate::metrics::{evaluate_against_all, MetricReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub meshes: Vec<ManifestMesh>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestMesh {
    pub name: String,
    pub mesh: PathBuf,
    pub ground_truth: Vec<PathBuf>,
}

impl DatasetManifest {
    /// Reads a manifest and resolves its paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).at(path)?;
        let mut m: DatasetManifest = serde_json::from_slice(&bytes).map_err(|e| Error::parse(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for entry in &mut m.meshes {
            entry.mesh = base.join(&entry.mesh);
            for gt in &mut entry.ground_truth {
                *gt = base.join(&*gt);
            }
        }
        Ok(m)
    }
}

/// How several annotations of one mesh are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Annotations {
    /// Mean over all annotations.
    #[default]
    Average,
    /// Only the first listed annotation.
    First,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<(String, MetricReport)>,
    pub aggregate: MetricReport,
}

impl EvalReport {
    /// One row per mesh followed by a `mean` row. Undefined cut
    /// discrepancies are left empty.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).at(path)?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec!["mesh"];
        header.extend(MetricReport::COLUMNS);
        w.write_record(&header)?;
        for (name, r) in self.rows.iter().map(|(n, r)| (n.as_str(), r)).chain([("mean", &self.aggregate)]) {
            let mut record = vec![name.to_string()];
            record.extend(r.values().iter().map(|v| v.map_or(String::new(), |x| x.to_string())));
            w.write_record(&record)?;
        }
        w.flush().at(path)
    }
}

/// Location of `name`'s labeling in `outputs`, if any.
pub fn output_path(outputs: &Path, name: &str) -> Option<PathBuf> {
    ["json", "seg"]
        .iter()
        .map(|ext| outputs.join(format!("{name}.{ext}")))
        .find(|p| p.is_file())
}

/// Loads a labeling that may be indexed by source polygon.
fn load_for(mesh: &TriMesh, path: &Path) -> Result<FaceLabeling> {
    let raw = load_labels(path)?;
    mesh.labels_from_source(raw.labels())
}

/// Most common part count among annotations (ties to the smaller count),
/// the target of the smoothing-weight search.
pub fn mode_part_count(annotations: &[FaceLabeling]) -> Option<usize> {
    let mut counts: Vec<usize> = annotations.iter().map(|l| l.num_labels()).collect();
    counts.sort_unstable();
    counts
        .chunk_by(|a, b| a == b)
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .map(|run| run[0])
}

/// Evaluates every manifest mesh; fails with `MissingOutput` listing the
/// meshes that have no labeling in `outputs`.
pub fn run_eval(manifest: &DatasetManifest, outputs: &Path, annotations: Annotations) -> Result<EvalReport> {
    let missing: Vec<String> = manifest
        .meshes
        .iter()
        .filter(|m| output_path(outputs, &m.name).is_none())
        .map(|m| m.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingOutput(missing));
    }
    let rows = manifest
        .meshes
        .par_iter()
        .map(|entry| {
            let mesh = load_mesh(&entry.mesh, None)?;
            let seg = load_for(&mesh, &output_path(outputs, &entry.name).expect("checked above"))?;
            let gts = match annotations {
                Annotations::Average => &entry.ground_truth[..],
                Annotations::First => &entry.ground_truth[..entry.ground_truth.len().min(1)],
            };
            let gts = gts.iter().map(|p| load_for(&mesh, p)).collect::<Result<Vec<_>>>()?;
            let report = evaluate_against_all(&mesh, &seg, &gts).map_err(|e| match e {
                Error::EmptyInput(_) => Error::InvalidConfig(format!("mesh {} lists no ground truth", entry.name)),
                e => e,
            })?;
            Ok((entry.name.clone(), report))
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<MetricReport> = rows.iter().map(|r| r.1).collect();
    Ok(EvalReport {
        aggregate: MetricReport::mean(&reports),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{save_labels_json, save_mesh};
    use crate::metrics::evaluate;
    use crate::shapes;

    fn write_dataset(dir: &Path, items: &[(&str, TriMesh, FaceLabeling)]) -> DatasetManifest {
        let mut meshes = Vec::new();
        for (name, mesh, gt) in items {
            save_mesh(mesh, &dir.join(format!("{name}.obj")), None).unwrap();
            save_labels_json(gt, &dir.join(format!("{name}_gt.json"))).unwrap();
            meshes.push(ManifestMesh {
                name: name.to_string(),
                mesh: format!("{name}.obj").into(),
                ground_truth: vec![format!("{name}_gt.json").into()],
            });
        }
        let manifest = DatasetManifest { meshes };
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_vec(&manifest).unwrap()).unwrap();
        DatasetManifest::load(&path).unwrap()
    }

    #[test]
    fn ground_truth_outputs_give_a_zero_row() {
        let dir = tempfile::tempdir().unwrap();
        let s = shapes::two_box_union();
        let manifest = write_dataset(dir.path(), &[("boxes", s.mesh.clone(), s.ground_truth.clone())]);
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        save_labels_json(&s.ground_truth, &out.join("boxes.json")).unwrap();
        let report = run_eval(&manifest, &out, Annotations::Average).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].1, report.aggregate);
        assert_eq!(report.aggregate.values().iter().map(|v| v.unwrap()).sum::<f64>(), 0.0);

        let csv_path = dir.path().join("report.csv");
        report.write_csv(&csv_path).unwrap();
        let text = fs::read_to_string(csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "mesh,cut_discrepancy,hamming,hamming_rm,hamming_rf,rand_index,global_ce,local_ce");
        assert_eq!(lines[2], "mean,0,0,0,0,0,0,0");
    }

    #[test]
    fn aggregate_is_the_mean_of_rows() {
        let dir = tempfile::tempdir().unwrap();
        let grid = |seed| shapes::jittered_grid(4, 3, 0.2, seed);
        let items: Vec<(&str, TriMesh, FaceLabeling)> = (0..3)
            .map(|i| {
                let m = grid(i);
                let gt = FaceLabeling::new((0..24).map(|f| f % (i as u32 + 2)).collect());
                (["a", "b", "c"][i as usize], m, gt)
            })
            .collect();
        let manifest = write_dataset(dir.path(), &items);
        let out = dir.path().join("out");
        fs::create_dir(&out).unwrap();
        let mut expected = Vec::new();
        for (i, (name, m, gt)) in items.iter().enumerate() {
            let seg = FaceLabeling::new((0..24).map(|f| (f / (4 + i)) as u32).collect());
            save_labels_json(&seg, &out.join(format!("{name}.json"))).unwrap();
            expected.push(evaluate(m, &seg, gt).unwrap());
        }
        let report = run_eval(&manifest, &out, Annotations::Average).unwrap();
        let mean = MetricReport::mean(&expected);
        for (a, b) in report.aggregate.values().iter().zip(mean.values()) {
            assert!((a.unwrap() - b.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_prefers_the_smaller_count_on_ties() {
        let l = |v: Vec<u32>| FaceLabeling::new(v);
        let gts = [l(vec![0, 1, 2]), l(vec![0, 0, 1]), l(vec![0, 1, 1]), l(vec![0, 1, 2])];
        assert_eq!(mode_part_count(&gts), Some(2));
        assert_eq!(mode_part_count(&gts[..1]), Some(3));
        assert_eq!(mode_part_count(&[]), None);
    }

    #[test]
    fn missing_outputs_are_listed() {
        let dir = tempfile::tempdir().unwrap();
        let s = shapes::two_box_union();
        let manifest = write_dataset(
            dir.path(),
            &[("x", s.mesh.clone(), s.ground_truth.clone()), ("y", s.mesh.clone(), s.ground_truth.clone())],
        );
        fs::write(dir.path().join("y.seg"), "0\n").unwrap();
        match run_eval(&manifest, dir.path(), Annotations::First) {
            Err(Error::MissingOutput(names)) => assert_eq!(names, vec!["x".to_string()]),
            other => panic!("{other:?}"),
        }
    }
}
