//! gnuplot scripts for regime maps.

use std::fmt::Write;

use tgv1d_core::analysis::RegimeMap;

use crate::io::fmt17;

const COLOURS: [&str; 10] =
    ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"];

/// Distinct labels of a map in sorted order; their positions are the colour
/// codes used by [`regime_script`].
pub fn label_codes(map: &RegimeMap) -> Vec<String> {
    let mut labels: Vec<String> = map.labels.iter().flatten().cloned().collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Self-contained script drawing the map as a colour image with one
/// colour per label. The data are embedded, so the script runs on its own.
pub fn regime_script(map: &RegimeMap, title: &str) -> String {
    let labels = label_codes(map);
    let code = |l: &str| labels.iter().position(|x| x == l).unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "# {title}");
    let _ = writeln!(s, "# columns: alpha beta code; codes are listed in cbtics");
    let _ = writeln!(s, "$map << EOD");
    for (i, &beta) in map.betas.iter().enumerate() {
        for (j, &alpha) in map.alphas.iter().enumerate() {
            let _ = writeln!(s, "{} {} {}", fmt17(alpha), fmt17(beta), code(map.label(i, j)));
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "EOD");
    let _ = writeln!(s, "set title \"{title}\"");
    let _ = writeln!(s, "set xlabel \"alpha\"");
    let _ = writeln!(s, "set ylabel \"beta\"");
    let _ = writeln!(s, "set xrange [{}:{}]", fmt17(lo(&map.alphas)), fmt17(hi(&map.alphas)));
    let _ = writeln!(s, "set yrange [{}:{}]", fmt17(lo(&map.betas)), fmt17(hi(&map.betas)));
    let k = labels.len().max(1);
    let palette: Vec<String> =
        (0..k).map(|c| format!("{c} \"{}\"", COLOURS[c % COLOURS.len()])).collect();
    let _ = writeln!(s, "set palette maxcolors {k} defined ({})", palette.join(", "));
    let _ = writeln!(s, "set cbrange [-0.5:{}]", k as f64 - 0.5);
    let tics: Vec<String> = labels.iter().enumerate().map(|(c, l)| format!("\"{l}\" {c}")).collect();
    let _ = writeln!(s, "set cbtics ({})", tics.join(", "));
    let _ = writeln!(s, "plot $map using 1:2:3 with image notitle");
    s
}

fn lo(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn hi(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
