using UnityEngine;

// __CLASS__ lets the player trigger nearby doors, switches and levers.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private float interactRadius = 1.5f;
    [SerializeField] private LayerMask interactableMask;
    [SerializeField] private KeyCode interactKey = KeyCode.E;

    private Collider2D focused;

    private void Update()
    {
        focused = FindClosest();
        if (focused != null && Input.GetKeyDown(interactKey))
        {
            Interact(focused.gameObject);
        }
    }

    private Collider2D FindClosest()
    {
        Collider2D[] hits = Physics2D.OverlapCircleAll(transform.position, interactRadius, interactableMask);
        Collider2D best = null;
        float bestDistance = float.MaxValue;
        foreach (Collider2D hit in hits)
        {
            float distance = Vector2.Distance(transform.position, hit.transform.position);
            if (distance < bestDistance)
            {
                best = hit;
                bestDistance = distance;
            }
        }
        return best;
    }

    public void Interact(GameObject target)
    {
        target.SendMessage("OnInteract", gameObject, SendMessageOptions.DontRequireReceiver);
    }

    public bool HasFocus()
    {
        return focused != null;
    }
}
