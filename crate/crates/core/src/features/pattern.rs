//! Fixed sampling pattern for the 256-bit binary descriptor.
//!
//! Point pairs were drawn once from an isotropic Gaussian (sigma = patch/5,
//! the classic BRIEF G-II layout) over the 31x31 patch, clipped to
//! [-13, 13], and frozen here so descriptors never depend on runtime RNG
//! behavior. Coordinates are (x1, y1, x2, y2) offsets from the keypoint;
//! rotating them by the keypoint orientation keeps every sample within a
//! radius of 13*sqrt(2) < 19 pixels.

pub(crate) const TEST_PAIRS: [(i8, i8, i8, i8); 256] = [
    (-2, -4, -7, -1), (-7, -6, 3, 8), (0, -5, -3, -1), (-2, -2, -1, 7),
    (3, -4, 2, -5), (-2, 3, 2, 3), (5, -1, 7, 4), (-8, -7, -3, 3),
    (0, 7, 4, 7), (2, -1, 2, 1), (-10, -3, 8, 3), (-8, 3, -13, 7),
    (-1, -10, 8, -8), (5, -2, 12, 5), (-7, -2, 2, -5), (4, 0, -3, -7),
    (-6, -7, -13, -2), (-5, -3, 2, 1), (-10, -10, -1, -4), (4, 5, 0, 3),
    (8, 2, -1, -3), (-7, 0, -2, 4), (9, -6, -13, -9), (1, 3, 6, 5),
    (0, -4, 0, 0), (-5, 5, -4, -6), (-4, 13, -12, -1), (5, -11, 0, -6),
    (13, 4, -1, 0), (3, -9, 2, -7), (-7, -7, 5, 0), (0, 2, 0, -9),
    (-8, -7, 2, -5), (13, 2, -8, -13), (-4, -5, 7, -5), (5, -4, 0, 0),
    (-3, -2, -7, -4), (3, 4, 3, 1), (-10, -10, -3, 2), (-6, 1, -1, 1),
    (4, -7, -13, -1), (5, 0, 4, -9), (7, 8, 10, 1), (10, -5, -4, -3),
    (-8, -9, -4, 2), (-2, -6, -2, 9), (-8, -4, 9, 11), (3, 1, 6, 3),
    (-3, 6, 6, -2), (-1, 2, -8, 1), (-13, 0, -9, -3), (7, 0, -8, 4),
    (0, 1, 1, 3), (-6, 4, 1, -4), (5, 1, 4, -1), (-2, 0, -2, -2),
    (-1, -12, 4, -13), (-2, 9, -6, 7), (-8, 0, -9, -1), (-5, 9, 3, 2),
    (1, -3, 6, 2), (0, 6, -3, 0), (1, 5, 1, -6), (9, -8, -2, -4),
    (12, 5, 13, 7), (5, -4, 2, 1), (4, 12, -2, -1), (-2, -4, 4, 9),
    (-12, -4, 1, 4), (4, -5, -2, -1), (-1, -6, -8, 10), (-1, -3, -11, -12),
    (-2, -2, -11, -8), (4, -2, 4, 3), (-2, 7, 3, 8), (10, -6, -10, -3),
    (0, -2, -1, 1), (-7, -4, -9, -13), (-3, -7, 6, 3), (-6, 0, -2, 3),
    (2, 1, -7, -1), (-1, -3, -13, 7), (8, -6, 6, -3), (1, 13, 4, -3),
    (-1, 2, -6, -1), (13, 9, -8, 1), (-3, 12, -8, 10), (0, -10, 9, -6),
    (-2, -3, -5, 10), (4, -5, 3, -1), (-12, 1, -9, -3), (-13, -4, -6, 1),
    (8, 2, 3, 6), (-3, 2, -3, 13), (11, 4, -6, 5), (-13, 2, 4, 0),
    (-4, 2, 9, 7), (-13, -7, -8, 0), (5, 3, 1, -6), (2, 8, 1, -1),
    (2, 3, -6, -7), (3, -5, 0, 4), (0, -3, 13, -1), (-2, 7, -3, 6),
    (-1, 1, 6, -11), (3, -3, 0, -10), (-1, -6, -12, -8), (3, -5, 8, 3),
    (0, 4, -8, 13), (10, -8, 0, 3), (9, 7, 1, 2), (3, -13, -13, 2),
    (-4, 11, 1, 1), (4, -2, -2, 2), (9, -7, 2, -11), (4, -8, 7, 4),
    (6, -1, -10, -1), (-13, -5, 3, 8), (-9, -12, 4, -5), (12, 7, 0, 3),
    (5, 5, -1, -6), (4, 5, 7, 2), (9, -2, 9, 2), (-3, 3, 3, 3),
    (-13, -3, 1, 7), (-13, -10, 2, 1), (-4, 8, 0, -10), (2, -1, 10, 6),
    (-5, -6, 6, -2), (-2, -8, 2, 1), (4, 2, 1, 2), (-6, 13, -10, 4),
    (-8, 13, 1, 5), (-1, -9, -3, 6), (-5, 11, -9, 0), (0, 7, -1, -2),
    (-1, 7, -10, -10), (0, -13, -3, -11), (6, 1, -5, -4), (8, 3, -6, -4),
    (-12, -4, 5, 6), (3, -4, 1, 5), (-8, 1, 0, -3), (8, -6, 3, 5),
    (1, -9, 1, 5), (3, -2, -1, 0), (9, -3, 1, -1), (-6, -1, -8, -4),
    (-4, 3, 4, 6), (2, 6, -12, 2), (4, 7, -4, -3), (6, 2, -5, -5),
    (-2, -3, -4, 4), (6, 2, 7, 5), (-10, 1, 6, -1), (-8, 10, 8, 10),
    (0, 8, 0, -5), (-3, 6, 0, -3), (3, 9, 1, 7), (5, 7, -9, 9),
    (10, 4, -1, -4), (6, 4, 4, -13), (3, 10, 1, 6), (-11, -2, -6, -1),
    (-2, -13, -11, 1), (-2, 6, -9, 9), (6, -8, 11, -3), (7, -1, -3, -6),
    (-4, 3, -1, 9), (-5, 4, 1, -2), (-5, 7, 2, 1), (-7, -2, -1, 2),
    (-4, -3, -8, 2), (3, -10, 6, 7), (9, -3, 6, -7), (6, 9, -3, 1),
    (5, 7, -10, -7), (7, -12, 2, -4), (4, 7, 10, -4), (-9, 8, 11, -10),
    (2, -11, 5, -2), (9, 6, -5, 12), (0, 5, -5, -3), (-1, -1, 3, -3),
    (2, -2, 0, -3), (13, 3, -1, -10), (4, 7, -5, 13), (-4, 3, 7, 4),
    (4, -2, 10, 0), (4, 2, -2, 7), (-2, 9, 10, -1), (-9, -3, -6, -6),
    (-10, 1, 3, -3), (7, -1, 2, 3), (0, 8, -10, 9), (-2, 0, -7, -8),
    (-4, -5, 13, 0), (3, -6, -4, 1), (-8, -7, 1, -7), (2, -6, -7, 4),
    (2, -2, 6, 8), (-7, 0, 4, -10), (-2, 5, -6, 0), (-13, -2, -4, -4),
    (-13, -9, -3, 8), (-3, -4, -4, 5), (4, 6, 9, -4), (-3, -7, 7, 1),
    (4, -2, -3, -5), (-8, 3, -1, -4), (4, -1, -4, 3), (6, -13, 13, -5),
    (0, 1, -3, 12), (10, 2, 2, 3), (-2, -7, 6, 4), (-3, 10, -1, -1),
    (-1, -3, 11, 2), (-5, 0, -13, 5), (-6, 3, -6, -3), (-8, -2, -8, -1),
    (1, -5, -1, -4), (9, 2, -3, 1), (0, 1, -11, 2), (-3, -8, 9, 5),
    (11, -1, 10, -1), (3, 4, 3, 0), (2, 0, 11, -4), (-8, -11, 7, -3),
    (-5, -2, -4, -2), (1, -2, 4, 2), (4, -10, -4, 1), (-1, 11, -13, -2),
    (-13, -2, 3, -5), (10, 3, 9, 2), (7, 7, -2, -3), (-6, -8, 0, -6),
    (2, 0, -5, -2), (-1, 2, -10, 13), (-3, 5, 6, 0), (-5, -2, 2, 9),
    (-5, 13, 9, -6), (-1, -1, 5, 2), (3, -2, -4, 0), (0, 2, 9, 7),
    (2, 4, 7, -4), (1, -1, 1, -4), (-2, 4, -10, -4), (-9, -6, 4, 8),
    (10, 0, 0, -10), (3, 1, 5, -12), (-7, 1, 4, -1), (3, -7, -3, -9),
    (-10, 7, 5, 0), (5, 5, 6, -11), (-3, -3, 6, -1), (-4, -12, 3, 5),
];
