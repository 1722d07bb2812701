//! Bundled example networks, addressable by name.
//!
//! | name      | network                                                        |
//! |-----------|----------------------------------------------------------------|
//! | `fig1`    | four corner sources of a 3×2 box, two shared interior targets |
//! | `fig2a`   | unit square corners feeding a centre vertex                    |
//! | `fig2b`   | the two reversible diagonals of the unit square                |
//! | `fig2c`   | complete graph on the unit square                              |
//! | `fig3a`   | three collinear points, both ends reacting to the middle       |
//! | `fig3b`   | the image of `fig3a` under a non-affine map                    |
//! | `fig4a`   | `fig1` under `M = [[4/3, 1/2], [1/3, 1]]`                       |
//! | `fig5a`   | bistable two-reaction network                                  |
//! | `fig5b`   | `fig5a` under `y ↦ [[1,1],[0,-1]] y + (0,1)`                    |
//! | `fig6a`   | Brusselator variant with oscillating rates                      |
//! | `fig6b`   | `fig6a` rotated by π/3                                         |
//! | `fig7a`   | complete graph on four points of the line `x + y = 3`           |
//! | `fig7b`   | `fig7a` under the projective map of [`crate::transforms::fig7_projective_map`] |
//! | `k3_line` | complete graph on `{0, 1, 2} ⊂ ℝ¹`                             |

use crate::error::{CrnError, Result};
use crate::network::{parse_network, MassActionSystem};

pub const NAMES: &[&str] = &[
    "fig1", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4a", "fig5a", "fig5b", "fig6a", "fig6b",
    "fig7a", "fig7b", "k3_line",
];

pub fn text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1" => include_str!("../fixtures/fig1.json"),
        "fig2a" => include_str!("../fixtures/fig2a.json"),
        "fig2b" => include_str!("../fixtures/fig2b.json"),
        "fig2c" => include_str!("../fixtures/fig2c.json"),
        "fig3a" => include_str!("../fixtures/fig3a.json"),
        "fig3b" => include_str!("../fixtures/fig3b.json"),
        "fig4a" => include_str!("../fixtures/fig4a.json"),
        "fig5a" => include_str!("../fixtures/fig5a.json"),
        "fig5b" => include_str!("../fixtures/fig5b.json"),
        "fig6a" => include_str!("../fixtures/fig6a.json"),
        "fig6b" => include_str!("../fixtures/fig6b.json"),
        "fig7a" => include_str!("../fixtures/fig7a.json"),
        "fig7b" => include_str!("../fixtures/fig7b.json"),
        "k3_line" => include_str!("../fixtures/k3_line.json"),
        _ => return None,
    })
}

pub fn load(name: &str) -> Result<MassActionSystem> {
    let text = text(name).ok_or_else(|| CrnError::Unsupported(format!("no fixture named `{name}`")))?;
    parse_network(text)
}

/// Loads a fixture known to exist; panics otherwise.
pub fn system(name: &str) -> MassActionSystem {
    load(name).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}
