use hoiseg_web::{depth_rgba, labels_rgba, response_rgba, Session, HEIGHT, WIDTH};

#[test]
fn render_fills_the_demo_frame() {
    let mut s = Session::new().unwrap();
    let (depth, labels) = s.render(3, 0.3, 0.1).unwrap();
    assert_eq!((depth.width, depth.height), (WIDTH, HEIGHT));
    assert!(labels.labels.iter().any(|&l| l != 10));
    assert_eq!(depth_rgba(depth, 3.0).len(), WIDTH * HEIGHT * 4);
}

#[test]
fn operations_need_their_inputs() {
    let mut s = Session::new().unwrap();
    assert!(s.feature_response(0).is_err());
    assert!(s.segment(1.0).is_err());
    s.render(1, 0.3, 0.0).unwrap();
    assert!(s.feature_response(s.feature_count()).is_err());
    assert!(s.segment(1.0).is_err());
    assert!(s.render(1, -1.0, 0.0).is_err());
}

#[test]
fn feature_response_covers_every_pixel() {
    let mut s = Session::new().unwrap();
    s.render(5, 0.3, 0.0).unwrap();
    let r = s.feature_response(7).unwrap();
    assert_eq!(r.len(), WIDTH * HEIGHT);
    assert!(r.iter().all(|v| v.is_finite()));
    let rgba = response_rgba(&r);
    assert_eq!(rgba.len(), r.len() * 4);
    assert!(rgba.chunks(4).all(|p| p[3] == 255));
}

#[test]
fn segmentation_with_and_without_smoothing() {
    let mut s = Session::new().unwrap();
    s.train(4).unwrap();
    assert!(s.is_trained());
    s.render(9, 0.3, 0.15).unwrap();
    let raw = s.segment(0.0).unwrap();
    let smooth = s.segment(2.0).unwrap();
    assert_eq!(raw.labels.len(), WIDTH * HEIGHT);
    assert!((0.0..=1.0).contains(&raw.accuracy) && (0.0..=1.0).contains(&smooth.accuracy));
    assert_eq!(s.segment(0.0).unwrap().labels, raw.labels);
    let flips = |l: &[u8]| l.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(flips(&smooth.labels) <= flips(&raw.labels));
    assert_eq!(labels_rgba(&smooth.labels).len(), WIDTH * HEIGHT * 4);
}
