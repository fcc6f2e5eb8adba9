"""
Config Loader Service
Reads run configurations from INI files and JSON reproducibility records
"""

import configparser
import json
import logging
from pathlib import Path
from typing import Union

from rest_framework.exceptions import ValidationError

from converter.constants import N_STAGES
from converter.exceptions import ConfigurationError
from harness.services.runner import RunSpec

logger = logging.getLogger(__name__)

LIST_KEYS = {'flash_offsets', 'comparator_offsets', 'seeds'}
SCALAR_SECTIONS = {'frontend', 'bias', 'stimulus'}


def _value(key: str, raw: str):
    raw = raw.strip()
    if key in LIST_KEYS:
        return [item.strip() for item in raw.split(',') if item.strip()]
    return raw


def _section(parser: configparser.ConfigParser, name: str) -> dict:
    return {key: _value(key, raw) for key, raw in parser.items(name)}


def ini_to_payload(parser: configparser.ConfigParser) -> dict:
    """
    Map INI sections onto the RunSpecSerializer payload.

    [adc] holds the preset name and top-level converter fields, [run] the
    mode, rate, record length, area, seed and averaged seeds; [stage1]..[stage10] override
    individual stages.
    """
    payload = {}
    adc = {}
    stages = {}
    for name in parser.sections():
        section = _section(parser, name)
        if name == 'adc':
            adc.update(section)
        elif name == 'run':
            payload.update(section)
        elif name in SCALAR_SECTIONS:
            if name == 'stimulus':
                payload['stimulus'] = section
            else:
                adc[name] = section
        elif name.startswith('stage') and name[len('stage'):].isdigit():
            index = int(name[len('stage'):])
            if not 1 <= index <= N_STAGES:
                raise ConfigurationError(f"section [{name}] is outside stage1..stage{N_STAGES}")
            stages[index] = section
        else:
            raise ConfigurationError(f"unknown section [{name}]")

    if stages:
        adc['stages'] = [stages.get(index, {}) for index in range(1, max(stages) + 1)]
    if adc:
        payload['adc'] = adc
    return payload


def _format_errors(detail) -> str:
    if isinstance(detail, dict):
        return '; '.join(f"{key}: {_format_errors(value)}" for key, value in detail.items())
    if isinstance(detail, list):
        return ', '.join(_format_errors(item) for item in detail if item)
    return str(detail)


def spec_from_payload(payload: dict) -> RunSpec:
    from harness.serializers import RunSpecSerializer

    serializer = RunSpecSerializer(data=payload)
    try:
        serializer.is_valid(raise_exception=True)
        return serializer.build()
    except ValidationError as exc:
        raise ConfigurationError(f"invalid configuration: {_format_errors(exc.detail)}")


def load_ini(path: Union[str, Path]) -> RunSpec:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"configuration file {path} not found")
    logger.info(f"Loading configuration from {path}")
    return spec_from_payload(ini_to_payload(parser))


def load_json(path: Union[str, Path]) -> RunSpec:
    """
    Load a JSON file. An emitted reproducibility record restores its run spec
    exactly; any other object is read as a serializer payload.
    """
    try:
        with open(path) as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ConfigurationError(f"configuration file {path} not found")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}")

    if 'run_spec' in data:
        try:
            return RunSpec.from_dict(data['run_spec']).validate()
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed run_spec in {path}: {exc}")
    return spec_from_payload(data)


def load_config(path: Union[str, Path]) -> RunSpec:
    if Path(path).suffix.lower() == '.json':
        return load_json(path)
    return load_ini(path)
