//! Dataset CSV files: one row per decoded bitstream, cachegrind event names
//! as count columns.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use decode_energy::{Dataset, EventKind, EventVector, MeasurementRecord};

use crate::error::CliError;

pub const HEADER: [&str; 14] = [
    "id", "codec", "decoder", "energy_J", "time_s", "Ir", "I1mr", "ILmr", "Dr", "D1mr", "DLmr",
    "Dw", "D1mw", "DLmw",
];

/// Canonical text for a real: at most 12 significant digits, positional for
/// magnitudes in [1e-3, 1e6), scientific otherwise, no trailing zeros.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };

    if (-3..6).contains(&exp) {
        let point = exp + 1;
        let body = if point <= 0 {
            format!("0.{}{digits}", "0".repeat((-point) as usize))
        } else if point as usize >= digits.len() {
            format!("{digits}{}", "0".repeat(point as usize - digits.len()))
        } else {
            let (int, frac) = digits.split_at(point as usize);
            format!("{int}.{frac}")
        };
        format!("{sign}{body}")
    } else {
        let (lead, rest) = digits.split_at(1);
        if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        }
    }
}

fn input_error(line: u64, message: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {message}"))
}

pub fn read_dataset_from(reader: impl Read) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("unreadable CSV header: {e}")))?
        .clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::Input(format!(
            "line 1: header must be `{}`",
            HEADER.join(",")
        )));
    }

    let mut dataset = Dataset::default();
    for row in rdr.records() {
        let row = row.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = row.position().map_or(0, |p| p.line());
        let real = |i: usize| -> Result<f64, CliError> {
            row[i].parse::<f64>().map_err(|_| {
                input_error(line, format!("{} `{}` is not a number", HEADER[i], &row[i]))
            })
        };
        let energy = real(3)?;
        let time = real(4)?;
        let mut counts = [0u64; 9];
        for (k, count) in counts.iter_mut().enumerate() {
            let cell = &row[5 + k];
            *count = cell.parse().map_err(|_| {
                input_error(
                    line,
                    format!("{} `{cell}` is not a non-negative integer", HEADER[5 + k]),
                )
            })?;
        }
        let record = EventVector::new(counts)
            .and_then(|events| {
                MeasurementRecord::new(&row[0], &row[1], &row[2], energy, time, events)
            })
            .map_err(|e| CliError::Core(e).context(format!("line {line}")))?;
        dataset
            .push(record)
            .map_err(|e| CliError::Core(e).context(format!("line {line}")))?;
    }
    Ok(dataset)
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    read_dataset_from(file)
}

pub fn write_dataset_to(dataset: &Dataset, writer: impl Write) -> Result<(), CliError> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let io = |e: csv::Error| CliError::Input(format!("writing CSV: {e}"));
    wtr.write_record(HEADER).map_err(io)?;
    for r in dataset.records() {
        let mut fields = vec![
            r.id.clone(),
            r.codec.clone(),
            r.decoder.clone(),
            format_real(r.energy),
            format_real(r.decode_time),
        ];
        fields.extend(EventKind::ALL.iter().map(|k| r.events.get(*k).to_string()));
        wtr.write_record(&fields).map_err(io)?;
    }
    wtr.flush()
        .map_err(|e| CliError::Input(format!("writing CSV: {e}")))
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), CliError> {
    let file =
        File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    write_dataset_to(dataset, file)
}

pub fn dataset_to_string(dataset: &Dataset) -> String {
    let mut buf = Vec::new();
    write_dataset_to(dataset, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        let cases = [
            (1.25, "1.25"),
            (0.42, "0.42"),
            (6.79, "6.79"),
            (2.0, "2"),
            (100000.0, "100000"),
            (999999.5, "999999.5"),
            (1e6, "1e6"),
            (0.001, "0.001"),
            (0.000999, "9.99e-4"),
            (1.0 / 3.0, "0.333333333333"),
            (-2.5e-9, "-2.5e-9"),
            (123456789.0, "1.23456789e8"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_real(x), want, "{x}");
        }
    }

    #[test]
    fn formatted_reals_are_fixed_points() {
        for x in [
            1.0 / 3.0,
            2.0 / 3.0,
            12.345678901234,
            7.1e-7,
            3.3e12,
            0.0123,
        ] {
            let once = format_real(x);
            let twice = format_real(once.parse().unwrap());
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn header_must_match() {
        let text = "id,codec,decoder,energy,time_s,Ir,I1mr,ILmr,Dr,D1mr,DLmr,Dw,D1mw,DLmw\n";
        assert!(matches!(
            read_dataset_from(text.as_bytes()),
            Err(CliError::Input(_))
        ));
    }

    #[test]
    fn bad_cells_report_their_line() {
        let text = format!(
            "{}\na,H,F,1.0,0.5,10,1,0,5,1,0,5,1,0\nb,H,F,x,0.5,10,1,0,5,1,0,5,1,0\n",
            HEADER.join(",")
        );
        match read_dataset_from(text.as_bytes()) {
            Err(CliError::Input(msg)) => assert!(msg.starts_with("line 3"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
