//! Classification-report generation from a predictions CSV.

use crate::PipelineError;
use cxrkit_core::metrics::{classification_report, ClassificationReport, ConfusionMatrix};
use std::fs;
use std::io::Read;
use std::path::Path;

/// One `path,true_label,pred_label` record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub path: String,
    pub true_label: String,
    pub pred_label: String,
}

/// Reads the predictions CSV, rejecting malformed headers and rows.
pub fn parse_predictions<R: Read>(reader: R) -> Result<Vec<Prediction>, PipelineError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = csv_reader.records();
    let header = records
        .next()
        .ok_or_else(|| PipelineError::InvalidInput("predictions file is empty".into()))?
        .map_err(PipelineError::Csv)?;
    let fields: Vec<&str> = header.iter().map(|f| f.trim()).collect();
    if fields != ["path", "true_label", "pred_label"] {
        return Err(PipelineError::InvalidInput(format!(
            "malformed predictions header: expected 'path,true_label,pred_label', got '{}'",
            fields.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in records.enumerate() {
        let record = record.map_err(PipelineError::Csv)?;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(PipelineError::InvalidInput(format!(
                "predictions row {}: expected 3 fields, got {}",
                i + 2,
                record.len()
            )));
        }
        rows.push(Prediction {
            path: record[0].trim().to_string(),
            true_label: record[1].trim().to_string(),
            pred_label: record[2].trim().to_string(),
        });
    }
    if rows.is_empty() {
        return Err(PipelineError::InvalidInput(
            "predictions file has no rows".into(),
        ));
    }
    Ok(rows)
}

/// Builds the confusion matrix over `classes` (derived from the file in
/// first-appearance order when empty) and returns the report.
pub fn report_from_predictions(
    predictions: &[Prediction],
    classes: &[String],
) -> Result<ClassificationReport, PipelineError> {
    let classes: Vec<String> = if classes.is_empty() {
        let mut derived = Vec::new();
        for p in predictions {
            for label in [&p.true_label, &p.pred_label] {
                if !derived.contains(label) {
                    derived.push(label.clone());
                }
            }
        }
        derived
    } else {
        classes.to_vec()
    };
    let mut cm = ConfusionMatrix::zeros(&classes)?;
    for p in predictions {
        cm.record(&p.true_label, &p.pred_label)?;
    }
    Ok(classification_report(&cm)?)
}

/// Serializes the report as `metric,class,value` rows; aggregate rows use
/// an empty class field, except the weighted averages which carry
/// `weighted`.
pub fn report_csv(report: &ClassificationReport) -> String {
    let mut out = String::from("metric,class,value\n");
    out.push_str(&format!("accuracy,,{:.4}\n", report.overall_accuracy));
    for (name, value) in [
        ("precision", report.weighted_precision),
        ("recall", report.weighted_recall),
        ("specificity", report.weighted_specificity),
        ("f1", report.weighted_f1),
    ] {
        out.push_str(&format!("{name},weighted,{value:.4}\n"));
    }
    for c in &report.per_class {
        out.push_str(&format!("support,{},{}\n", c.label, c.support));
        out.push_str(&format!("precision,{},{:.4}\n", c.label, c.precision));
        out.push_str(&format!("recall,{},{:.4}\n", c.label, c.recall));
        out.push_str(&format!("specificity,{},{:.4}\n", c.label, c.specificity));
        out.push_str(&format!("f1,{},{:.4}\n", c.label, c.f1));
    }
    out
}

/// Full `report` command: reads the predictions file and writes
/// `report.txt` and `report.csv` into `out_dir`. Returns the report for
/// display.
pub fn write_report(
    predictions_path: &Path,
    classes: &[String],
    out_dir: &Path,
    include_macro: bool,
) -> Result<ClassificationReport, PipelineError> {
    let file = fs::File::open(predictions_path)?;
    let predictions = parse_predictions(file)?;
    let report = report_from_predictions(&predictions, classes)?;

    fs::create_dir_all(out_dir)?;
    let mut text = report.format_text();
    if include_macro {
        text.push_str(&format!(
            "\nmacro precision      {:.4}\nmacro recall         {:.4}\nmacro f1             {:.4}\nmacro specificity    {:.4}\n",
            report.macro_precision(),
            report.macro_recall(),
            report.macro_f1(),
            report.macro_specificity()
        ));
    }
    fs::write(out_dir.join("report.txt"), &text)?;
    fs::write(out_dir.join("report.csv"), report_csv(&report))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_valid_predictions() {
        let text = "path,true_label,pred_label\na.pgm,covid,covid\nb.pgm,normal,covid\n";
        let rows = parse_predictions(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].pred_label, "covid");
    }

    #[test]
    fn rejects_bad_header() {
        let text = "path,truth,pred\na,b,c\n";
        assert!(parse_predictions(text.as_bytes()).is_err());
    }

    #[test]
    fn unknown_label_is_named_in_error() {
        let preds = vec![Prediction {
            path: "a".into(),
            true_label: "viral".into(),
            pred_label: "viral".into(),
        }];
        let classes = vec!["covid".to_string(), "normal".to_string()];
        let err = report_from_predictions(&preds, &classes).unwrap_err();
        assert!(err.to_string().contains("viral"), "{err}");
    }

    #[test]
    fn perfect_predictions_print_ones() {
        let preds = vec![
            Prediction {
                path: "a".into(),
                true_label: "x".into(),
                pred_label: "x".into(),
            },
            Prediction {
                path: "b".into(),
                true_label: "y".into(),
                pred_label: "y".into(),
            },
        ];
        let report = report_from_predictions(&preds, &[]).unwrap();
        let text = report.format_text();
        assert!(text.contains("overall accuracy     1.0000"));
        let csv = report_csv(&report);
        assert!(csv.contains("accuracy,,1.0000"));
        assert!(csv.contains("f1,weighted,1.0000"));
    }
}
