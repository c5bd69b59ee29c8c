//! Reconstructions of classical examples and counterexamples, with a
//! fixture writer (JSON + PGM + manifest).

pub mod figures;
pub mod savare;
pub mod shapes;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::ElasticaParams;
use crate::error::{Error, Result};
use crate::io::{write_json, write_pgm};
use crate::relaxed::CuspedSet;
use crate::system::CurveSystem;
use figures::{CuspTube, DropInDomain, ExampleOne, TwoDisks, CORRIDOR_FILLETS};
use shapes::P;

/// Environment variable naming the fixture directory.
pub const FIXTURES_ENV: &str = "ELASTICA_FIXTURES";

pub fn fixtures_dir() -> PathBuf {
    std::env::var_os(FIXTURES_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures"))
}

/// Two unit circular arcs of opening `2 pi / 3`, mirror images of each
/// other, meeting the x axis tangentially at cusps `gap` apart.
pub fn mirrored_arcs(gap: f64, samples: usize) -> Result<CuspedSet<f64>> {
    let arc = |tip: P, side: f64| -> Vec<P> {
        let c = P::new(tip.x, tip.y + 1.0);
        (0..=samples)
            .map(|i| {
                let a = -PI / 2.0 - side * (2.0 * PI / 3.0) * i as f64 / samples as f64;
                P::new(c.x + a.cos(), c.y + a.sin())
            })
            .collect()
    };
    let (l, r) = (P::new(-gap / 2.0, 0.0), P::new(gap / 2.0, 0.0));
    CuspedSet::new(vec![arc(l, 1.0), arc(r, -1.0)], vec![(l, r)])
}

/// Closed form for [`mirrored_arcs`]: `2 (2 pi / 3)(alpha + beta) + 2 alpha gap`.
pub fn mirrored_arcs_energy(gap: f64, params: &ElasticaParams<f64>) -> f64 {
    2.0 * (2.0 * PI / 3.0) * (params.alpha + params.beta) + 2.0 * params.alpha * gap
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub describes: String,
    pub files: Vec<String>,
    pub parameters: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub fixtures: Vec<ManifestEntry>,
}

pub const FIXTURE_NAMES: [&str; 6] = ["example-one", "two-disks", "cusp-tube", "drop-in-domain", "mirrored-arcs", "savare"];

/// Grid spacing of the image fixtures.
pub const IMAGE_SPACING: f64 = 0.02;

fn entry(name: &str, describes: &str, files: &[&str], parameters: Value) -> ManifestEntry {
    ManifestEntry { name: name.into(), describes: describes.into(), files: files.iter().map(|s| s.to_string()).collect(), parameters }
}

/// Writes fixture `name` into `dir` and returns its manifest entry.
pub fn write_fixture(name: &str, dir: &Path) -> Result<ManifestEntry> {
    fs::create_dir_all(dir)?;
    let p = |f: &str| dir.join(f);
    match name {
        "example-one" => {
            let ex = ExampleOne::build(IMAGE_SPACING)?;
            write_pgm(p("figEF.pgm"), &ex.u)?;
            for (k, s) in ex.systems.iter().enumerate() {
                write_json(p(&format!("fig5_gamma{}.json", k + 1)), s)?;
            }
            for k in [1, 3, 4] {
                write_json(p(&format!("fig5_gamma{k}_gamma2.json")), &ex.family(k)?)?;
            }
            write_json(p("fig5_drops.json"), &ex.drops)?;
            Ok(entry(
                name,
                "two-level set E, F with four candidate systems; nesting verdicts",
                &["figEF.pgm", "fig5_gamma1.json", "fig5_gamma2.json", "fig5_gamma3.json", "fig5_gamma4.json", "fig5_gamma1_gamma2.json", "fig5_gamma3_gamma2.json", "fig5_gamma4_gamma2.json", "fig5_drops.json"],
                json!({"E": "stadium [-3.5,3.5] x [-3,0] with end radius 1.5, notch y = -0.5 sin^2(pi (x+1)/2) on [-1,1]",
                       "F": "drops radius 0.5 width 1 shear 1.6 at cusps (-1,0), (1,0)",
                       "gamma4_inner": "drops radius 0.35 width 0.35, multiplicity 2",
                       "spacing": figures::SPACING, "grid_spacing": IMAGE_SPACING,
                       "expected": {"gamma1_gamma2": ["condition_iii"], "gamma3_gamma2": [], "gamma4_gamma2": ["condition_ii"]}}),
            ))
        }
        "two-disks" => {
            let fig = TwoDisks::build(IMAGE_SPACING)?;
            write_pgm(p("fig9_u.pgm"), &fig.u)?;
            write_json(p("fig9_unbridged.json"), &fig.unbridged()?)?;
            let mut files = vec!["fig9_u.pgm".to_string(), "fig9_unbridged.json".to_string(), "fig9_drops.json".to_string()];
            for r in CORRIDOR_FILLETS {
                let f = format!("fig9_bridged_r{r}.json");
                write_json(p(&f), &fig.bridged(r)?)?;
                files.push(f);
            }
            write_json(p("fig9_drops.json"), &fig.drops)?;
            let files: Vec<&str> = files.iter().map(String::as_str).collect();
            Ok(entry(
                name,
                "two disks under a pair of drops; bridged vs unbridged families and the strict gap",
                &files,
                json!({"disks": "radius 1 at (-2.5,0), (2.5,0)", "drops": "radius 0.5 width 1, cusps (-1.5,0), (1.5,0)",
                       "corridor_fillets": CORRIDOR_FILLETS, "gap": fig.gap(), "grid_spacing": IMAGE_SPACING}),
            ))
        }
        "cusp-tube" => {
            let tube = CuspTube::build(1.0)?;
            write_json(p("fig1_drops.json"), &tube.drops)?;
            write_json(p("fig1_boundary.json"), &CurveSystem::single(tube.boundary.clone()))?;
            write_pgm(p("fig1_u_collar0.2.pgm"), &tube.grid(0.2, IMAGE_SPACING)?)?;
            let params = ElasticaParams::standard();
            let mut csv = String::from("collar,energy,l1\n");
            for collar in CUSP_TUBE_COLLARS {
                let row = tube.approximant(collar, &params, 64)?;
                csv.push_str(&format!("{},{:.9},{:.9}\n", row.collar, row.energy, row.l1));
            }
            fs::write(p("fig1_table.csv"), csv)?;
            Ok(entry(
                name,
                "bridged cusp pair and smooth approximants with bounded energy",
                &["fig1_drops.json", "fig1_boundary.json", "fig1_u_collar0.2.pgm", "fig1_table.csv"],
                json!({"drops": "radius 0.5 width 1, cusps (-0.5,0), (0.5,0)", "collars": CUSP_TUBE_COLLARS, "levels": 64}),
            ))
        }
        "drop-in-domain" => {
            let d = DropInDomain::build()?;
            write_json(p("fig10_drop.json"), &d.single)?;
            write_json(p("fig10_curve.json"), &CurveSystem::single(d.single_curve.clone()))?;
            write_json(p("fig10_mirrored.json"), &d.mirrored)?;
            write_json(p("fig10_omega.json"), &d.omega)?;
            write_json(p("fig11_double.json"), &d.double)?;
            write_json(p("fig11_omega.json"), &d.double_omega)?;
            Ok(entry(
                name,
                "drops with cusps inside polygonal domains, for localized energies",
                &["fig10_drop.json", "fig10_curve.json", "fig10_mirrored.json", "fig10_omega.json", "fig11_double.json", "fig11_omega.json"],
                json!({"drop": "radius 0.5 width 1, cusp (0,0), body to the left", "omega": "[-1.5,-0.1] x [-1,1]",
                       "mirror_cusp": [0.4, 0.0], "double": "drops rotated by +-30 degrees about the shared cusp", "double_omega": "[-1.5,0] x [-1,1]"}),
            ))
        }
        "mirrored-arcs" => {
            let set = mirrored_arcs(1.0, 2000)?;
            write_json(p("fig6_mirrored_arcs.json"), &set)?;
            Ok(entry(
                name,
                "mirrored circular arcs joined at a cusp pair",
                &["fig6_mirrored_arcs.json"],
                json!({"radius": 1.0, "opening": "2 pi / 3", "gap": 1.0, "expected_energy_p2": mirrored_arcs_energy(1.0, &ElasticaParams::standard())}),
            ))
        }
        "savare" => {
            let params = ElasticaParams::standard();
            let reports = (0..=6).map(|n| savare::report(n, &params)).collect::<Result<Vec<_>>>()?;
            write_json(p("savare.json"), &reports)?;
            Ok(entry(name, "oscillating one-dimensional profile: level counts, energy, weak convergence", &["savare.json"], json!({"n": [0, 1, 2, 3, 4, 5, 6], "per_slab": 4})))
        }
        other => Err(Error::invalid("gallery", format!("unknown fixture {other:?}; available: {}", FIXTURE_NAMES.join(", ")))),
    }
}

pub const CUSP_TUBE_COLLARS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Writes every fixture and `manifest.json` into `dir`.
pub fn write_all(dir: &Path) -> Result<Manifest> {
    let fixtures = FIXTURE_NAMES.iter().map(|n| write_fixture(n, dir)).collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { format: 1, fixtures };
    write_json(dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}
