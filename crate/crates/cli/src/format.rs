//! CSV tables with a fixed numeric format.

use std::fmt::Write as _;

use iondecay_core::TimeSeries;

pub const TIME_SERIES_HEADER: &str = "t_s,p_down,sigma_z,mean_n";

/// Shortest decimal that round-trips after rounding to 9 significant digits.
/// NaN is written as `nan`.
pub fn number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let a = rounded.abs();
    if a == 0.0 || (1e-4..1e9).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// A comment header followed by a CSV table.
pub fn table(header: &str, columns: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = String::from(header);
    s.push_str(columns);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(number).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn time_series(header: &str, series: &TimeSeries) -> String {
    table(
        header,
        TIME_SERIES_HEADER,
        (0..series.len()).map(|i| {
            vec![
                series.times[i],
                series.p_down[i],
                series.sigma_z[i],
                series.mean_n[i],
            ]
        }),
    )
}

/// Two numeric columns from a CSV file, skipping comments and any header row.
pub fn read_two_columns(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .filter_map(|l| {
            let mut it = l.split(',').map(str::trim);
            let x = it.next()?.parse().ok()?;
            let y = it.next()?.parse().ok()?;
            Some((x, y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(number(1.0 / 3.0), "0.333333333");
        assert_eq!(number(0.5), "0.5");
        assert_eq!(number(1.0), "1");
        assert_eq!(number(2.9999999999e-6), "3e-6");
        assert_eq!(number(-1.234567891234e12), "-1.23456789e12");
        assert_eq!(number(f64::NAN), "nan");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(1e-5 * (1.0 + 1e-12)), "1e-5");
    }

    #[test]
    fn series_table_layout() {
        let mut s = TimeSeries::with_capacity(1);
        s.push(0.0, -1.0, f64::NAN);
        let out = time_series("# mode = x\n", &s);
        assert_eq!(out, "# mode = x\nt_s,p_down,sigma_z,mean_n\n0,1,-1,nan\n");
    }

    #[test]
    fn two_column_reader_skips_text() {
        let rows = read_two_columns("# c\nt,p\n1,0.5\n2, 0.25,9\nbad\n");
        assert_eq!(rows, vec![(1.0, 0.5), (2.0, 0.25)]);
    }
}
