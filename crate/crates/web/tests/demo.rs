use latentgraph::ssl::MaskStrategy;
use latentgraph_web::demo::{mask_preview, sbm_summary, train_sbm, SbmParams};

const SMALL: SbmParams = SbmParams {
    nodes: 60,
    classes: 3,
    intra_p: 0.15,
    inter_p: 0.01,
    seed: 3,
};

#[test]
fn mask_preview_counts_and_rates() {
    let scores: Vec<f64> = (0..20).map(|i| (i % 7) as f64).collect();
    let p = mask_preview(&scores, 0.5, 0.4, 2000, 1).unwrap();
    assert_eq!(p.mask_count, 10);
    assert_eq!(p.exploit_count, 4);
    assert_eq!(p.diffi_mask.iter().filter(|m| **m).count(), 10);
    // The top-4 scores (6, 6, 5, 5) sit at nodes 6, 13, 5, 12.
    for v in [5, 6, 12, 13] {
        assert!(p.diffi_mask[v], "node {v}");
    }
    for (v, (&rate, &s)) in p.rates.iter().zip(&scores).enumerate() {
        let want = 0.6 * 0.5 + (s / 6.0) * 0.4 * 0.5;
        assert!((rate - want).abs() < 1e-12, "node {v}");
    }
    assert_eq!(p.prob_frequency.len(), 20);
    assert!(p.prob_frequency.iter().all(|f| (0.0..=1.0).contains(f)));
    assert!(p.mean_prob_size > 0.0);
}

#[test]
fn mask_preview_rejects_bad_ratios() {
    assert!(mask_preview(&[1.0, 2.0], 1.5, 0.5, 10, 0).is_err());
    assert!(mask_preview(&[1.0, 2.0], 0.5, -0.1, 10, 0).is_err());
}

#[test]
fn mask_preview_without_positive_scores_has_no_rates() {
    let p = mask_preview(&[0.0; 8], 0.5, 0.5, 10, 0).unwrap();
    assert!(p.rates.is_empty());
    assert_eq!(p.diffi_mask.iter().filter(|m| **m).count(), 4);
}

#[test]
fn sbm_summary_is_consistent() {
    let s = sbm_summary(&SMALL).unwrap();
    assert_eq!(s.nodes, 60);
    assert_eq!(s.class_sizes.iter().sum::<usize>(), 60);
    assert_eq!(s.degree_histogram.iter().sum::<usize>(), 60);
    let degree_sum: usize = s.degree_histogram.iter().enumerate().map(|(d, c)| d * c).sum();
    assert!((s.mean_degree - degree_sum as f64 / 60.0).abs() < 1e-12);
    assert_eq!(s.isolated, s.degree_histogram[0]);
    assert!(s.homophily > 0.5, "{}", s.homophily);
}

#[test]
fn short_training_run_reports_curves_and_scores() {
    let r = train_sbm(&SMALL, 6, MaskStrategy::Prob).unwrap();
    assert_eq!(r.losses.len(), 6);
    assert_eq!(r.masked.len(), 6);
    assert!(r.losses.iter().all(|l| l.is_finite() && *l >= 0.0));
    for acc in [r.probe_accuracy, r.raw_probe_accuracy, r.cluster_accuracy, r.raw_cluster_accuracy] {
        assert!((0.0..=1.0).contains(&acc), "{acc}");
    }
    let again = train_sbm(&SMALL, 6, MaskStrategy::Prob).unwrap();
    assert_eq!(r.losses, again.losses);
}
