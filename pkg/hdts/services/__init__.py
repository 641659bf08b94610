"""Service layer: data model, constructions, subcategories and model-structure machinery."""
