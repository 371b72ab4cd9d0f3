from .metrics import (
    POSITIVE_CLASS,
    EvalReport,
    RocCurve,
    evaluate,
    format_percentage,
    pair_count_auc,
    read_roc_csv,
    roc,
    write_confusion_csv,
    write_report,
    write_roc_csv,
)
from .reports import (
    DistanceReport,
    distance_report,
    export_class_mean_images,
    export_reconstructions,
    to_pixel_bytes,
)
