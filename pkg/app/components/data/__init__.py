from .cache import load_dataset, save_dataset
from .dataset import LabeledDataset, balance_classes, concat, empty_like, split
from .images import load_image_dir, read_image, resize_bilinear, resize_image, write_pgm
from .synthetic import SynthSpec, class_templates, generate_synthetic
