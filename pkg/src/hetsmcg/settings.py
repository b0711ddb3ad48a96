"""Typed settings for experiment runs and the loader for matrix configuration files."""

from __future__ import annotations

import json
import logging
from collections import OrderedDict
from pathlib import Path

import yaml

from hetsmcg.errors import ConfigurationError, InputError

logger = logging.getLogger(__name__)


class Setting:
    """A named configuration value with a category, a description and a default.

    Args:
        name (str) : The name of the setting as it is used in configuration files
        category (str) : The category of the setting
        description (str) : A description of the setting
        default : The default value of the setting

    Attributes:
        name (str) : The name of the setting
        category (str) : The category of the setting
        description (str) : A description of the setting, including the default
        default : The default value of the setting
        value : The current value of the setting
    """

    def __init__(self, name: str, category: str, description: str, default=None) -> None:
        """Create a new setting."""
        self.name = name
        self.category = category
        self.description = description
        self.default = default
        if default is not None:
            self.value = default
            self.description += f"\n (Default: {default})"

    @property
    def value(self):
        """The value of the setting."""
        return self._value

    @value.setter
    def value(self, value):
        self._value = value

    def to_json(self):
        """Returns the value in a json compatible form."""
        return self.value


class NumericalSetting(Setting):
    """A setting that is a numerical value.

    It can additionally have a minimum and maximum value.
    """

    def __init__(
        self,
        name: str,
        category: str,
        description: str,
        default,
        min_value=None,
        max_value=None,
    ) -> None:
        """Create a new numerical setting."""
        self.min_value = min_value
        self.max_value = max_value
        super().__init__(
            name,
            category,
            self.description_limit_info(description, min_value, max_value),
            default,
        )

    def description_limit_info(self, description: str, min_value, max_value) -> str:
        """Updates the description with the limits of the setting if there are any.

        Args:
            description (str): The description of the setting.
            min_value: The minimum value of the setting.
            max_value: The maximum value of the setting.

        Returns:
            str: The description of the setting with the limits.
        """
        if min_value is not None and max_value is not None:
            description += f"\n (min: {min_value}, max: {max_value})"
        elif min_value is not None:
            description += f"\n (min: {min_value})"
        elif max_value is not None:
            description += f"\n (max: {max_value})"

        return description

    def check_limits(self, value):
        """Raises if the value is outside of the limits."""
        if self.min_value is not None and value < self.min_value:
            raise ConfigurationError(f"{self.name} = {value} is smaller than {self.min_value}")
        if self.max_value is not None and value > self.max_value:
            raise ConfigurationError(f"{self.name} = {value} is larger than {self.max_value}")
        return value


class FloatSetting(NumericalSetting):
    """A setting that is a Float."""

    @property
    def value(self):
        """The value of the setting. In this case, a float."""
        return self._value

    @value.setter
    def value(self, value):
        logger.debug(f"Setting {self.name} to {value}")
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{self.name} needs a number, got {value!r}")
        self._value = self.check_limits(value)


class IntSetting(NumericalSetting):
    """A setting that is an Integer."""

    @property
    def value(self):
        """The value of the setting. In this case, an int."""
        return self._value

    @value.setter
    def value(self, value):
        logger.debug(f"Setting {self.name} to {value}")
        if isinstance(value, bool):
            raise ConfigurationError(f"{self.name} needs an integer, got {value!r}")
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ConfigurationError(f"{self.name} needs an integer, got {value!r}")
        if number != int(number):
            raise ConfigurationError(f"{self.name} needs an integer, got {value!r}")
        self._value = self.check_limits(int(number))


class BooleanSetting(Setting):
    """A setting that is a Boolean."""

    @property
    def value(self):
        """The value of the setting. In this case, a bool."""
        return self._value

    @value.setter
    def value(self, value):
        if not isinstance(value, bool):
            raise ConfigurationError(f"{self.name} needs true or false, got {value!r}")
        logger.debug(f"Setting {self.name} to {value}")
        self._value = value


class SelectionSetting(Setting):
    """A setting that is a selection from a list of options.

    Args:
        name (str) : The name of the setting
        category (str) : The category of the setting
        options (list) : A list of options to choose from
        default : The default value of the setting
        description (str) : A description of the setting
    """

    def __init__(
        self, name: str, category: str, options: list, default, description: str
    ) -> None:
        """Create a new selection setting."""
        if default not in options:
            raise ConfigurationError("Default value must be one of the options")

        self.options = options

        super().__init__(name, category, description, default)

    @property
    def value(self):
        """The value of the setting, one of the options."""
        return self._value

    @value.setter
    def value(self, value):
        if value in self.options:
            logger.debug(f"Setting {self.name} to {value}")
            self._value = value
        else:
            raise ConfigurationError(
                f"{self.name} must be one of the options {self.options}, got {value!r}"
            )


class MultiSelectionSetting(Setting):
    """A setting that is a non-empty list of distinct options, kept in the order given.

    Args:
        name (str) : The name of the setting
        category (str) : The category of the setting
        options (list) : A list of options to choose from
        default (list) : The default selection
        description (str) : A description of the setting
    """

    def __init__(
        self, name: str, category: str, options: list, default: list, description: str
    ) -> None:
        """Create a new multi selection setting."""
        self.options = options
        super().__init__(name, category, description, list(default))

    @property
    def value(self):
        """The selected options."""
        return self._value

    @value.setter
    def value(self, value):
        if not isinstance(value, (list, tuple)):
            value = [value]
        unknown = [item for item in value if item not in self.options]
        if unknown:
            raise ConfigurationError(
                f"{self.name} must be chosen from {self.options}, got {unknown}"
            )
        if not value:
            raise ConfigurationError(f"{self.name} needs at least one entry")
        if len(set(value)) != len(value):
            raise ConfigurationError(f"{self.name} lists an entry twice: {value}")
        logger.debug(f"Setting {self.name} to {value}")
        self._value = list(value)

    def to_json(self):
        """Returns the selection as a list."""
        return list(self.value)


class StringSetting(Setting):
    """A setting that is a string."""

    @property
    def value(self):
        """The value of the setting. In this case, a string."""
        return self._value

    @value.setter
    def value(self, value):
        if not isinstance(value, str):
            raise ConfigurationError(f"{self.name} needs a string, got {value!r}")
        logger.debug(f"Setting {self.name} to {value}")
        self._value = value


class ExperimentSettings(OrderedDict):
    """Makes the settings of an experiment accessible as attributes. Additionally, it provides methods to get the settings by category."""

    def __getattr__(self, key):
        """Gets the value of a setting by its key.

        Args:
            key (str) : The key of the setting

        Returns:
            The value of the setting
        """
        try:
            return self[key].value
        except KeyError:
            raise AttributeError(key)

    def __setattr__(self, key, value):
        """Sets the value of a setting by its key.

        Args:
            key (str) : The key of the setting
            value : The value to set
        """
        self[key].value = value

    def add_setting(self, setting: Setting) -> None:
        """Adds a setting under its name.

        Args:
            setting (Setting) : The setting to add
        """
        self[setting.name] = setting

    @property
    def categories(self):
        """The categories of the settings."""
        categories = []

        for setting in self.values():
            if setting.category not in categories:
                categories.append(setting.category)

        return categories

    def get_settings_by_category(self, category):
        """Gets the settings by category.

        Args:
            category (str) : The category of the settings

        Returns:
            dict : The settings with the specified category
        """
        settings = dict()

        for key, setting in self.items():
            if setting.category == category:
                settings[key] = setting

        return settings

    def update_values(self, values: dict) -> None:
        """Sets several settings at once.

        Args:
            values (dict) : Setting name to value

        Raises:
            ConfigurationError : If a name does not belong to a setting
        """
        unknown = sorted(set(values) - set(self))
        if unknown:
            raise ConfigurationError(f"Unknown settings: {', '.join(unknown)}")
        for key, value in values.items():
            self[key].value = value

    def to_json(self) -> dict:
        """Returns a json representation of all setting values.

        Returns:
            dict: Setting name to value.
        """
        return {key: setting.to_json() for key, setting in self.items()}


SETUPS = [1, 2, 3, 4, 5]
FEATURE_MODES = ["text", "text+social"]
CONV_TYPES = ["sage", "gat", "hgt"]
GRAPH_MODES = ["hetero", "homo-truncate", "homo-pad"]
DATASETS = ["politifact", "gossipcop"]


def matrix_settings() -> ExperimentSettings:
    """Creates the settings of a run-matrix experiment with their defaults.

    Returns:
        ExperimentSettings: The settings.
    """
    settings = ExperimentSettings()
    add = settings.add_setting

    add(MultiSelectionSetting("datasets", "data", DATASETS, DATASETS, "Dataset tags to include"))
    add(MultiSelectionSetting("setups", "data", SETUPS, [5], "Graph construction setups"))
    add(MultiSelectionSetting("feature_modes", "data", FEATURE_MODES, ["text"], "Node features"))
    add(IntSetting("d_text", "data", "Text embedding dimension", 64, min_value=1))
    add(StringSetting("embedder", "data", "hashing or precomputed:FILE", "hashing"))
    add(IntSetting("embedder_seed", "data", "Seed of the hashing embedder", 0, min_value=0))
    add(SelectionSetting("count_scaling", "data", ["log1p", "raw"], "log1p", "Count features"))
    add(IntSetting("min_nodes", "data", "Minimum tweet and user nodes", 5, min_value=1))
    add(IntSetting("timeline_cap", "data", "Timeline tweets per user", 5, min_value=0))

    add(MultiSelectionSetting("convs", "model", CONV_TYPES, ["hgt"], "Graph convolutions"))
    add(MultiSelectionSetting("graph_modes", "model", GRAPH_MODES, ["hetero"], "Graph modes"))
    add(IntSetting("hidden_dim", "model", "Hidden dimension", 64, min_value=1))
    add(IntSetting("heads", "model", "Attention heads", 1, min_value=1))
    add(SelectionSetting("activation", "model", ["elu", "relu", "leaky_relu"], "elu", "Activation"))
    add(SelectionSetting("readout", "model", ["news_node", "mean_all"], "news_node", "Readout"))

    add(IntSetting("folds", "training", "Number of folds", 5, min_value=2))
    add(IntSetting("seed", "training", "Seed of folds, shuffling and initialization", 0, min_value=0))
    add(IntSetting("epochs", "training", "Train epochs", 20, min_value=1))
    add(IntSetting("batch_size", "training", "Graphs per batch", 16, min_value=1))
    add(FloatSetting("learning_rate", "training", "Adam learning rate", 8e-5, min_value=0.0))
    add(BooleanSetting("class_weights", "training", "Inverse frequency class weights", True))

    add(FloatSetting("alpha", "evaluation", "Significance level", 0.05, 0.0, 1.0))
    add(IntSetting("n_comparisons", "evaluation", "Bonferroni family size, 0 counts comparisons", 0, min_value=0))
    add(StringSetting("reference", "evaluation", "Reference cell, e.g. 5/text/hgt/hetero, empty for automatic", ""))

    add(IntSetting("workers", "execution", "Parallel processes for matrix cells", 1, min_value=1))

    return settings


def load_settings(path: Path | str) -> ExperimentSettings:
    """Loads matrix settings from a YAML or JSON file.

    Args:
        path (Path | str): The configuration file.

    Returns:
        ExperimentSettings: The defaults updated with the file contents.

    Raises:
        InputError: If the file cannot be read or parsed.
        ConfigurationError: If a key is unknown or a value is invalid.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"Configuration file {path} not found")
    try:
        # YAML is a superset of JSON
        values = yaml.safe_load(text) or {}
    except yaml.YAMLError as error:
        raise InputError(f"Configuration file {path} could not be parsed: {error}")
    if not isinstance(values, dict):
        raise ConfigurationError(f"Configuration file {path} needs a mapping at top level")

    settings = matrix_settings()
    settings.update_values(values)
    logger.info("Loaded settings from %s: %s", path, json.dumps(settings.to_json()))
    return settings
