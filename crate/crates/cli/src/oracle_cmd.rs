use adiabat_core::model::{build_path, ModelSpec};
use adiabat_core::mps::ObservableProduct;
use adiabat_core::oracle::{self, OracleLimits};

use crate::observables::parse_all;
use crate::records::{LogWriter, ObservableValue, Record};
use crate::run::{EXIT_OK, EXIT_RESOURCE, EXIT_USAGE};

/// One exact ground-state query per `s`, optionally with observable values.
pub fn oracle_query(
    spec: &ModelSpec,
    points: &[f64],
    products: &[String],
    log: &mut LogWriter,
) -> i32 {
    let path = match build_path(spec) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_USAGE;
        }
    };
    let (labels, obs): (Vec<String>, Vec<ObservableProduct>) =
        match parse_all(products, spec.n_sites) {
            Ok(v) => v.into_iter().unzip(),
            Err(e) => {
                eprintln!("{e}");
                return EXIT_USAGE;
            }
        };
    let limits = OracleLimits::default();
    for &s in points {
        if !(0.0..=path.s_max()).contains(&s) {
            eprintln!("s = {s} outside [0, {}]", path.s_max());
            return EXIT_USAGE;
        }
        let gs = match oracle::exact_ground_state(&path, s, &limits) {
            Ok(g) => g,
            Err(e) => {
                let _ = log.emit(&Record::Error {
                    exit_code: EXIT_RESOURCE,
                    kind: "oracle".into(),
                    message: e.to_string(),
                });
                return EXIT_RESOURCE;
            }
        };
        let observables = labels
            .iter()
            .zip(&obs)
            .map(|(label, o)| {
                let v = gs.vector.dotc(&(o.to_dense() * &gs.vector));
                ObservableValue {
                    label: label.clone(),
                    re: v.re,
                    im: v.im,
                }
            })
            .collect();
        let rec = Record::Oracle {
            model: spec.family.clone(),
            n_sites: spec.n_sites,
            s,
            ground_energy: gs.energy,
            gap: gs.gap,
            degenerate: gs.degenerate,
            observables,
        };
        if let Err(e) = log.emit(&rec) {
            eprintln!("log: {e}");
            return EXIT_USAGE;
        }
    }
    EXIT_OK
}
