//! gnuplot scripts for the emitted CSV files. Scripts are written next to
//! their data and refer to it by file name.

use std::fmt::Write as _;

fn preamble(title: &str, output_png: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile commentschars '#'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{output_png}'");
    let _ = writeln!(s, "set title \"{title}\"");
    s
}

/// Squared deviation against index (one point per Farey term).
pub fn terms_script(csv: &str, m: u64) -> String {
    let mut s = preamble(&format!("Squared Farey deviations, m = {m}"), &png_name(csv));
    let _ = writeln!(s, "set xlabel 'i'\nset ylabel '(F_m(i) - i/n)^2'");
    let _ = writeln!(s, "plot '{csv}' using 1:5 with points pt 7 ps 0.4 notitle");
    s
}

/// P_m(k) over all k, with the prime hull overlaid when available.
pub fn profile_script(csv: &str, m: u64, hull_csv: Option<&str>) -> String {
    let mut s = preamble(&format!("P_m(k), m = {m}"), &png_name(csv));
    let _ = writeln!(s, "set xlabel 'k'\nset ylabel 'P_m(k)'");
    match hull_csv {
        Some(h) => {
            let _ = writeln!(
                s,
                "plot '{csv}' using 1:2 with points pt 7 ps 0.3 title 'all k', \\\n     '{h}' using 1:2 with linespoints pt 7 ps 0.4 title 'prime k'"
            );
        }
        None => {
            let _ = writeln!(s, "plot '{csv}' using 1:2 with points pt 7 ps 0.3 notitle");
        }
    }
    s
}

/// Prime hull, and the fitted envelope when the CSV carries one.
pub fn hull_script(csv: &str, m: u64, with_envelope: bool) -> String {
    let mut s = preamble(&format!("P_m(k) for prime k, m = {m}"), &png_name(csv));
    let _ = writeln!(s, "set xlabel 'k'\nset ylabel 'P_m(k)'");
    if with_envelope {
        let _ = writeln!(
            s,
            "plot '{csv}' using 1:2 with points pt 7 ps 0.4 title 'P_m(k)', \\\n     '{csv}' using 1:3 with lines lw 2 title 'envelope'"
        );
    } else {
        let _ = writeln!(s, "plot '{csv}' using 1:2 with linespoints pt 7 ps 0.4 notitle");
    }
    s
}

/// a(m) or b(m) with its model curve, and the residual panel.
pub fn fit_script(residuals_csv: &str, label: &str) -> String {
    let mut s = preamble(&format!("a(m), b(m) over {label}"), &png_name(residuals_csv));
    let _ = writeln!(s, "set multiplot layout 2,2");
    for (value, model, resid, name) in [(2, 3, 4, "a"), (5, 6, 7, "b")] {
        let _ = writeln!(s, "set title '{name}(m)'\nset xlabel 'm'");
        let _ = writeln!(
            s,
            "plot '{residuals_csv}' using 1:{value} with points pt 7 ps 0.4 title '{name}_m', \\\n     '{residuals_csv}' using 1:{model} with lines title 'model'"
        );
        let _ = writeln!(s, "set title 'residuals of {name}(m)'");
        let _ = writeln!(
            s,
            "plot '{residuals_csv}' using 1:{resid} with points pt 7 ps 0.4 notitle"
        );
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

/// R̃(x)/x^(−1+ε) against x on a logarithmic x axis.
pub fn ratio_script(csv: &str, epsilon: f64) -> String {
    let mut s = preamble(&format!("R~(x) / x^(-1+{epsilon})"), &png_name(csv));
    let _ = writeln!(s, "set logscale x\nset format x '10^{{%L}}'");
    let _ = writeln!(s, "set xlabel 'x'\nset ylabel 'ratio'");
    let _ = writeln!(s, "plot '{csv}' using 1:2 with lines lw 2 notitle");
    s
}

fn png_name(csv: &str) -> String {
    match csv.strip_suffix(".csv") {
        Some(stem) => format!("{stem}.png"),
        None => format!("{csv}.png"),
    }
}
